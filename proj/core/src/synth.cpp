#include <algorithm>
#include <cmath>
#include <limits>

#include "fusionloc/data.hpp"
#include "fusionloc/errors.hpp"
#include "fusionloc/rng.hpp"

namespace fusionloc {

namespace {

constexpr double kPi = 3.14159265358979323846;

// World frame: +y points down, floor plane at y = 0, boxes rest on it and
// extend upward (negative y). Cameras hover above the floor looking inward.

double intersect_floor(const Vec3& origin, const Vec3& dir) {
  if (dir.y <= 0.0) return -1.0;
  const double s = -origin.y / dir.y;
  return s > 0.0 ? s : -1.0;
}

double intersect_box(const AxisBox& box, const Vec3& origin, const Vec3& dir) {
  double t_near = 0.0;
  double t_far = std::numeric_limits<double>::infinity();
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
  const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < lo[a] || o[a] > hi[a]) return -1.0;
      continue;
    }
    double t0 = (lo[a] - o[a]) / d[a];
    double t1 = (hi[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return -1.0;
  }
  return t_near > 0.0 ? t_near : -1.0;
}

// Camera-to-world rotation for a camera at eye looking at target, camera
// axes x right, y down, z forward.
Mat3 look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 forward = (target - eye).normalized();
  const Vec3 world_down{0.0, 1.0, 0.0};
  Vec3 down = world_down - forward * world_down.dot(forward);
  const double n = down.norm();
  if (n < 1e-9) {
    throw InvalidInputError("look_at: camera pointing straight down");
  }
  down = down / n;
  const Vec3 right = down.cross(forward);
  return {{{right.x, down.x, forward.x},
           {right.y, down.y, forward.y},
           {right.z, down.z, forward.z}}};
}

}  // namespace

double surface_distance(const SceneModel& model, const Vec3& p) {
  double best = std::abs(p.y);  // floor plane y = 0
  for (const AxisBox& b : model.boxes) {
    const double dx = std::max(b.lo.x - p.x, p.x - b.hi.x);
    const double dy = std::max(b.lo.y - p.y, p.y - b.hi.y);
    const double dz = std::max(b.lo.z - p.z, p.z - b.hi.z);
    // Zero exactly on the surface, negative inside, positive outside along
    // the dominant axis; points near a face make |m| the face distance.
    const double m = std::max({dx, dy, dz});
    best = std::min(best, std::abs(m));
  }
  return best;
}

SynthScene synth_scene(std::uint64_t seed, std::size_t n_frames) {
  if (n_frames < 1) {
    throw InvalidInputError("synth_scene: n_frames must be >= 1");
  }
  Rng rng(derive_seed(seed, 0x5ce0e9u));

  SynthScene scene;
  const std::size_t n_boxes = 2 + rng.uniform_below(3);  // 2..4
  for (std::size_t b = 0; b < n_boxes; ++b) {
    const double angle = rng.uniform(0.0, 2.0 * kPi);
    const double dist = rng.uniform(0.3, 1.1);
    const double cx = dist * std::cos(angle);
    const double cz = dist * std::sin(angle);
    const double sx = rng.uniform(0.25, 0.7);
    const double sz = rng.uniform(0.25, 0.7);
    const double h = rng.uniform(0.4, 1.2);
    scene.model.boxes.push_back(
        {{cx - sx / 2.0, -h, cz - sz / 2.0}, {cx + sx / 2.0, 0.0, cz + sz / 2.0}});
  }

  // Smooth seeded trajectory: an arc around the boxes with gentle radius,
  // height and aim modulation.
  const double arc_start = rng.uniform(0.0, 2.0 * kPi);
  const double arc_span = rng.uniform(0.8 * kPi, 1.6 * kPi);
  const double base_radius = rng.uniform(2.2, 3.0);
  const double radius_wobble = rng.uniform(0.1, 0.3);
  const double base_height = rng.uniform(1.1, 1.5);
  const double height_wobble = rng.uniform(0.1, 0.25);
  const double aim_wobble = rng.uniform(0.05, 0.2);
  const double phase = rng.uniform(0.0, 2.0 * kPi);

  const CameraIntrinsics k = default_intrinsics();
  scene.frames.reserve(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double s =
        n_frames == 1 ? 0.5 : static_cast<double>(i) / (n_frames - 1);
    const double theta = arc_start + arc_span * s;
    const double radius = base_radius + radius_wobble * std::sin(3.0 * theta + phase);
    const double height = base_height + height_wobble * std::sin(2.0 * theta + phase);
    const Vec3 eye{radius * std::cos(theta), -height, radius * std::sin(theta)};
    const Vec3 target{aim_wobble * std::sin(theta + phase), -0.35,
                      aim_wobble * std::cos(2.0 * theta)};

    Frame frame;
    frame.index = static_cast<int>(i);
    const Mat3 r = look_at(eye, target);
    frame.pose.t = eye;
    frame.pose.q = rotmat_to_quat(r);

    frame.depth.width = k.width;
    frame.depth.height = k.height;
    frame.depth.depth.assign(static_cast<std::size_t>(k.width) * k.height, 0.0);
    frame.depth.valid.assign(static_cast<std::size_t>(k.width) * k.height, 0);
    frame.rgb.width = k.width;
    frame.rgb.height = k.height;
    frame.rgb.channels = 3;
    frame.rgb.data.assign(static_cast<std::size_t>(k.width) * k.height * 3, 15);

    for (int v = 0; v < k.height; ++v) {
      for (int u = 0; u < k.width; ++u) {
        // Same pixel-to-ray arithmetic the lifting equations use, so lifted
        // points land back on the geometry exactly.
        const Vec3 dir_cam{(u - k.c_u) / k.f_u, (v - k.c_v) / k.f_v, 1.0};
        const Vec3 dir{r[0][0] * dir_cam.x + r[0][1] * dir_cam.y + r[0][2] * dir_cam.z,
                       r[1][0] * dir_cam.x + r[1][1] * dir_cam.y + r[1][2] * dir_cam.z,
                       r[2][0] * dir_cam.x + r[2][1] * dir_cam.y + r[2][2] * dir_cam.z};
        double depth = -1.0;
        const double floor_s = intersect_floor(eye, dir);
        if (floor_s > 0.0) depth = floor_s;
        for (const AxisBox& b : scene.model.boxes) {
          const double s_box = intersect_box(b, eye, dir);
          if (s_box > 0.0 && (depth < 0.0 || s_box < depth)) depth = s_box;
        }
        if (depth <= 0.0 || depth > scene.model.max_range) continue;

        const std::size_t at = static_cast<std::size_t>(v) * k.width + u;
        frame.depth.depth[at] = depth;
        frame.depth.valid[at] = 1;
        const double shade = std::clamp(1.0 - depth / scene.model.max_range, 0.0, 1.0);
        frame.rgb.data[at * 3 + 0] = static_cast<std::uint8_t>(40 + 180 * shade);
        frame.rgb.data[at * 3 + 1] =
            static_cast<std::uint8_t>(30 + 200.0 * u / k.width * shade);
        frame.rgb.data[at * 3 + 2] =
            static_cast<std::uint8_t>(30 + 200.0 * v / k.height * shade);
      }
    }
    scene.frames.push_back(std::move(frame));
  }
  return scene;
}

}  // namespace fusionloc
