#include "fusionloc/pose.hpp"

#include <algorithm>
#include <cmath>

#include "fusionloc/errors.hpp"

namespace fusionloc {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

UnitQuaternion::UnitQuaternion(double u, const Vec3& v) : u_(u), v_(v) {
  const double norm = std::sqrt(u_ * u_ + v_.dot(v_));
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-6) {
    throw InvalidInputError("quaternion: input is not near unit norm");
  }
  u_ /= norm;
  v_ = v_ / norm;
  if (u_ < 0.0) {
    u_ = -u_;
    v_ = -v_;
  } else if (u_ == 0.0) {
    if (v_.x < 0.0 || (v_.x == 0.0 && (v_.y < 0.0 || (v_.y == 0.0 && v_.z < 0.0)))) {
      v_ = -v_;
    }
  }
}

Vec3 UnitQuaternion::rotate(const Vec3& p) const {
  // p' = p + 2v x (v x p + u p)
  const Vec3 t = v_.cross(p) + u_ * p;
  return p + 2.0 * v_.cross(t);
}

Vec3 quat_log(const UnitQuaternion& q) {
  const double vnorm = q.v().norm();
  if (vnorm == 0.0) return {0.0, 0.0, 0.0};
  const double angle = std::acos(std::clamp(q.u(), -1.0, 1.0));
  return q.v() * (angle / vnorm);
}

UnitQuaternion quat_exp(const Vec3& w) {
  const double norm = w.norm();
  if (!std::isfinite(norm)) {
    throw InvalidInputError("quat_exp: non-finite input");
  }
  if (norm == 0.0) return UnitQuaternion::identity();
  const double s = std::sin(norm) / norm;
  return UnitQuaternion(std::cos(norm), w * s);
}

UnitQuaternion rotmat_to_quat(const Mat3& r) {
  // Orthonormality and handedness check.
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += r[k][i] * r[k][j];
      const double expected = i == j ? 1.0 : 0.0;
      if (!std::isfinite(dot) || std::abs(dot - expected) > 1e-4) {
        throw InvalidInputError("rotmat_to_quat: matrix is not orthonormal");
      }
    }
  }
  const double det =
      r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) -
      r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
      r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
  if (std::abs(det - 1.0) > 1e-4) {
    throw InvalidInputError("rotmat_to_quat: determinant is not +1");
  }

  // Shepperd's method: branch on the largest of trace/diagonal entries.
  const double trace = r[0][0] + r[1][1] + r[2][2];
  double u, x, y, z;
  if (trace > r[0][0] && trace > r[1][1] && trace > r[2][2]) {
    const double s = std::sqrt(trace + 1.0) * 2.0;
    u = 0.25 * s;
    x = (r[2][1] - r[1][2]) / s;
    y = (r[0][2] - r[2][0]) / s;
    z = (r[1][0] - r[0][1]) / s;
  } else if (r[0][0] > r[1][1] && r[0][0] > r[2][2]) {
    const double s = std::sqrt(1.0 + r[0][0] - r[1][1] - r[2][2]) * 2.0;
    u = (r[2][1] - r[1][2]) / s;
    x = 0.25 * s;
    y = (r[0][1] + r[1][0]) / s;
    z = (r[0][2] + r[2][0]) / s;
  } else if (r[1][1] > r[2][2]) {
    const double s = std::sqrt(1.0 + r[1][1] - r[0][0] - r[2][2]) * 2.0;
    u = (r[0][2] - r[2][0]) / s;
    x = (r[0][1] + r[1][0]) / s;
    y = 0.25 * s;
    z = (r[1][2] + r[2][1]) / s;
  } else {
    const double s = std::sqrt(1.0 + r[2][2] - r[0][0] - r[1][1]) * 2.0;
    u = (r[1][0] - r[0][1]) / s;
    x = (r[0][2] + r[2][0]) / s;
    y = (r[1][2] + r[2][1]) / s;
    z = 0.25 * s;
  }
  return UnitQuaternion(u, {x, y, z});
}

Mat3 quat_to_rotmat(const UnitQuaternion& q) {
  const double u = q.u(), x = q.v().x, y = q.v().y, z = q.v().z;
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - u * z), 2 * (x * z + u * y)},
           {2 * (x * y + u * z), 1 - 2 * (x * x + z * z), 2 * (y * z - u * x)},
           {2 * (x * z - u * y), 2 * (y * z + u * x), 1 - 2 * (x * x + y * y)}}};
}

ad::Tensor pose_loss(const ad::Tensor& pred_t, const ad::Tensor& pred_logq,
                     const Vec3& true_t, const Vec3& true_logq,
                     const LossWeights& weights) {
  using namespace ad;
  if (pred_t.numel() != 3 || pred_logq.numel() != 3) {
    throw InvalidInputError("pose_loss: predictions must be length-3 tensors");
  }
  Tensor tt = Tensor::constant({3}, {true_t.x, true_t.y, true_t.z});
  Tensor tq = Tensor::constant({3}, {true_logq.x, true_logq.y, true_logq.z});
  Tensor t_term = mul(l1_norm(sub(pred_t, tt)), exp(negate(weights.beta)));
  Tensor r_term = mul(l2_norm(sub(pred_logq, tq)), exp(negate(weights.gamma)));
  return add(add(t_term, weights.beta), add(r_term, weights.gamma));
}

double translation_error(const Pose& pred, const Pose& truth) {
  return distance(pred.t, truth.t);
}

double rotation_error(const Pose& pred, const Pose& truth) {
  const double d = std::clamp(std::abs(pred.q.dot(truth.q)), 0.0, 1.0);
  return 2.0 * std::acos(d) * 180.0 / kPi;
}

std::pair<double, double> median_errors(
    const std::vector<std::pair<double, double>>& per_frame) {
  if (per_frame.empty()) {
    throw DegenerateInputError("median_errors: empty error list");
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  std::vector<double> ts, rs;
  ts.reserve(per_frame.size());
  rs.reserve(per_frame.size());
  for (const auto& [t, r] : per_frame) {
    ts.push_back(t);
    rs.push_back(r);
  }
  return {median(std::move(ts)), median(std::move(rs))};
}

}  // namespace fusionloc
