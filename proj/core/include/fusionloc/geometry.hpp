#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fusionloc/image.hpp"
#include "fusionloc/vec3.hpp"

namespace fusionloc {

// Pinhole camera parameters, pixel units.
struct CameraIntrinsics {
  double f_u = 585.0;  // horizontal focal length
  double f_v = 585.0;  // vertical focal length
  double c_u = 320.0;  // principal point column
  double c_v = 240.0;  // principal point row
  int width = 640;
  int height = 480;

  // Throws InvalidInputError when focal lengths are non-positive or the
  // principal point lies outside the image.
  void validate() const;
};

// Per-pixel metric depth (meters) with a validity mask. Invalid pixels carry
// no usable depth and are excluded from lifting.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;        // meters, row-major
  std::vector<std::uint8_t> valid;  // 0/1, row-major

  double at(int x, int y) const {
    return depth[static_cast<std::size_t>(y) * width + x];
  }
  bool is_valid(int x, int y) const {
    return valid[static_cast<std::size_t>(y) * width + x] != 0;
  }

  static DepthMap constant(int width, int height, double value);
};

// Unordered metric point set in the camera frame (x right, y down,
// z forward).
struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Lifts every valid pixel to a 3D point: z = D(u,v), x = z(u-c_u)/f_u,
// y = z(v-c_v)/f_v. Output is row-major over valid pixels, but callers must
// not rely on the order.
PointCloud depth_to_pointcloud(const DepthMap& depth, const CameraIntrinsics& k);

// Uniform box filter over the kernel_size^2 neighborhood, averaging only
// valid in-bounds pixels; the valid mask is passed through unchanged.
// kernel_size must be odd and >= 3.
DepthMap convolve_depth(const DepthMap& depth, int kernel_size);

// Per-index displacement statistics between two index-aligned clouds.
struct SmearMetric {
  double mean_displacement = 0.0;  // meters
  double max_displacement = 0.0;   // meters
};
SmearMetric smear_metric(const PointCloud& original, const PointCloud& convolved);

// Normalizes valid depths to [0,1] and maps them through the standard jet
// ramp (blue -> cyan -> green -> yellow -> red); invalid pixels come out
// black. Throws DegenerateInputError when no valid pixel exists or all valid
// depths are equal.
ImageU8 jet_colormap(const DepthMap& depth);

}  // namespace fusionloc
