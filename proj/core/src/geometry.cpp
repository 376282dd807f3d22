#include "fusionloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fusionloc/errors.hpp"

namespace fusionloc {

void CameraIntrinsics::validate() const {
  if (!(f_u > 0.0) || !(f_v > 0.0)) {
    throw InvalidInputError("intrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw InvalidInputError("intrinsics: image dimensions must be positive");
  }
  if (c_u < 0.0 || c_u >= width || c_v < 0.0 || c_v >= height) {
    throw InvalidInputError("intrinsics: principal point outside the image");
  }
}

DepthMap DepthMap::constant(int width, int height, double value) {
  DepthMap d;
  d.width = width;
  d.height = height;
  d.depth.assign(static_cast<std::size_t>(width) * height, value);
  d.valid.assign(static_cast<std::size_t>(width) * height, 1);
  return d;
}

PointCloud depth_to_pointcloud(const DepthMap& depth, const CameraIntrinsics& k) {
  k.validate();
  if (depth.width != k.width || depth.height != k.height) {
    throw InvalidInputError(
        "depth_to_pointcloud: depth map dimensions do not match intrinsics");
  }
  PointCloud cloud;
  cloud.points.reserve(depth.depth.size());
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      if (!depth.is_valid(u, v)) continue;
      const double z = depth.at(u, v);
      cloud.points.push_back(
          {z * (u - k.c_u) / k.f_u, z * (v - k.c_v) / k.f_v, z});
    }
  }
  return cloud;
}

DepthMap convolve_depth(const DepthMap& depth, int kernel_size) {
  if (kernel_size < 3 || kernel_size % 2 == 0) {
    throw InvalidInputError("convolve_depth: kernel size must be odd and >= 3, got " +
                            std::to_string(kernel_size));
  }
  const int r = kernel_size / 2;
  DepthMap out;
  out.width = depth.width;
  out.height = depth.height;
  out.depth.assign(depth.depth.size(), 0.0);
  out.valid = depth.valid;
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      if (!depth.is_valid(x, y)) continue;
      double sum = 0.0;
      int count = 0;
      const int y0 = std::max(0, y - r), y1 = std::min(depth.height - 1, y + r);
      const int x0 = std::max(0, x - r), x1 = std::min(depth.width - 1, x + r);
      for (int ny = y0; ny <= y1; ++ny) {
        for (int nx = x0; nx <= x1; ++nx) {
          if (!depth.is_valid(nx, ny)) continue;
          sum += depth.at(nx, ny);
          ++count;
        }
      }
      // The pixel itself is valid, so count >= 1.
      out.depth[static_cast<std::size_t>(y) * depth.width + x] = sum / count;
    }
  }
  return out;
}

SmearMetric smear_metric(const PointCloud& original, const PointCloud& convolved) {
  if (original.size() != convolved.size()) {
    throw InvalidInputError("smear_metric: clouds are not index-aligned");
  }
  SmearMetric m;
  if (original.empty()) return m;
  double sum = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double d = distance(original.points[i], convolved.points[i]);
    sum += d;
    m.max_displacement = std::max(m.max_displacement, d);
  }
  m.mean_displacement = sum / static_cast<double>(original.size());
  return m;
}

namespace {

double jet_channel(double a, double b) {
  return std::clamp(std::min(a, b), 0.0, 1.0);
}

}  // namespace

ImageU8 jet_colormap(const DepthMap& depth) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < depth.depth.size(); ++i) {
    if (!depth.valid[i]) continue;
    lo = std::min(lo, depth.depth[i]);
    hi = std::max(hi, depth.depth[i]);
  }
  if (!(lo < hi)) {
    throw DegenerateInputError(
        "jet_colormap: depth map has no valid range (all invalid or constant)");
  }
  ImageU8 img;
  img.width = depth.width;
  img.height = depth.height;
  img.channels = 3;
  img.data.assign(static_cast<std::size_t>(depth.width) * depth.height * 3, 0);
  for (std::size_t i = 0; i < depth.depth.size(); ++i) {
    if (!depth.valid[i]) continue;
    const double t = (depth.depth[i] - lo) / (hi - lo);
    const double red = jet_channel(4.0 * t - 1.5, -4.0 * t + 4.5);
    const double green = jet_channel(4.0 * t - 0.5, -4.0 * t + 3.5);
    const double blue = jet_channel(4.0 * t + 0.5, -4.0 * t + 2.5);
    img.data[i * 3 + 0] = static_cast<std::uint8_t>(std::lround(255.0 * red));
    img.data[i * 3 + 1] = static_cast<std::uint8_t>(std::lround(255.0 * green));
    img.data[i * 3 + 2] = static_cast<std::uint8_t>(std::lround(255.0 * blue));
  }
  return img;
}

}  // namespace fusionloc
