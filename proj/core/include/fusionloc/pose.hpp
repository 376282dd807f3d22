#pragma once

#include <array>
#include <utility>
#include <vector>

#include "fusionloc/autodiff.hpp"
#include "fusionloc/vec3.hpp"

namespace fusionloc {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Unit quaternion q = (u, v) with scalar part u and imaginary part v.
// Construction normalizes and enforces the canonical sign u >= 0 (for u == 0
// the first nonzero component of v is made positive).
class UnitQuaternion {
 public:
  UnitQuaternion() : u_(1.0), v_{0.0, 0.0, 0.0} {}
  UnitQuaternion(double u, const Vec3& v);

  static UnitQuaternion identity() { return {}; }

  double u() const { return u_; }
  const Vec3& v() const { return v_; }

  // Quaternion dot product <q1, q2> in R^4.
  double dot(const UnitQuaternion& o) const {
    return u_ * o.u_ + v_.dot(o.v_);
  }

  // Rotates a vector by this quaternion.
  Vec3 rotate(const Vec3& p) const;

 private:
  double u_;
  Vec3 v_;
};

// Axis-scaled half angle: (v/||v||) * arccos(u), zero for the identity.
Vec3 quat_log(const UnitQuaternion& q);

// Inverse map: (cos||w||, sin||w|| * w/||w||); exp(log(q)) == q for canonical
// quaternions.
UnitQuaternion quat_exp(const Vec3& w);

// Branch-stable conversion (largest-diagonal method). R must be orthonormal
// within 1e-4 with determinant ~ +1, otherwise InvalidInputError.
UnitQuaternion rotmat_to_quat(const Mat3& r);

Mat3 quat_to_rotmat(const UnitQuaternion& q);

// 6DOF camera pose: position plus orientation.
struct Pose {
  Vec3 t;
  UnitQuaternion q;
};

// Learnable homoscedastic weights balancing the translation and rotation
// terms of the loss.
struct LossWeights {
  ad::Tensor beta;   // scalar parameter, init 0.0
  ad::Tensor gamma;  // scalar parameter, init -3.0
};

// loss = ||t - t_true||_1 * e^{-beta} + beta
//      + ||logq - logq_true||_2 * e^{-gamma} + gamma
// pred_t and pred_logq are length-3 tensors on the graph.
ad::Tensor pose_loss(const ad::Tensor& pred_t, const ad::Tensor& pred_logq,
                     const Vec3& true_t, const Vec3& true_logq,
                     const LossWeights& weights);

// Euclidean position error in meters.
double translation_error(const Pose& pred, const Pose& truth);

// Angular error 2*arccos(|<q_pred, q_truth>|) in degrees, in [0, 180].
double rotation_error(const Pose& pred, const Pose& truth);

// Component-wise medians; even counts average the two central values.
// Throws DegenerateInputError for an empty list.
std::pair<double, double> median_errors(
    const std::vector<std::pair<double, double>>& per_frame);

}  // namespace fusionloc
