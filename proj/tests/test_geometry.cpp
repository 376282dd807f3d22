#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fusionloc/data.hpp"
#include "fusionloc/errors.hpp"
#include "fusionloc/geometry.hpp"
#include "fusionloc/ply.hpp"
#include "fusionloc/rng.hpp"
#include "test_util.hpp"

using namespace fusionloc;

namespace {

DepthMap two_plane_step(int width, int height, double near_m, double far_m) {
  DepthMap d = DepthMap::constant(width, height, near_m);
  for (int y = 0; y < height; ++y) {
    for (int x = width / 2; x < width; ++x) {
      d.depth[static_cast<std::size_t>(y) * width + x] = far_m;
    }
  }
  return d;
}

CameraIntrinsics small_intrinsics() {
  return CameraIntrinsics{150.0, 150.0, 80.0, 60.0, 160, 120};
}

}  // namespace

TEST_CASE("principal point lifts onto the optical axis") {
  CameraIntrinsics k = default_intrinsics();
  DepthMap d = DepthMap::constant(k.width, k.height, 2.0);
  const PointCloud pc = depth_to_pointcloud(d, k);
  // Row-major: pixel (u=320, v=240) is at index 240*640+320.
  const Vec3 p = pc.points[240 * 640 + 320];
  CHECK(p.x == 0.0);
  CHECK(p.y == 0.0);
  CHECK(p.z == 2.0);
}

TEST_CASE("unit-offset pixel lifts to x equal to depth") {
  // Pixel u = 905 sits exactly one focal length right of the principal
  // point: (905 - 320) / 585 == 1.
  CameraIntrinsics wide{585.0, 585.0, 320.0, 240.0, 1024, 480};
  DepthMap dw = DepthMap::constant(wide.width, wide.height, 1.0);
  const PointCloud pcw = depth_to_pointcloud(dw, wide);
  const Vec3 pw = pcw.points[240 * 1024 + 905];
  CHECK(pw.x == 1.0);
  CHECK(pw.y == 0.0);
  CHECK(pw.z == 1.0);
}

TEST_CASE("invalid pixels produce no points") {
  CameraIntrinsics k = small_intrinsics();
  DepthMap d = DepthMap::constant(k.width, k.height, 1.5);
  d.valid[5] = 0;
  d.valid[77] = 0;
  const PointCloud pc = depth_to_pointcloud(d, k);
  CHECK(pc.size() == d.depth.size() - 2);
}

TEST_CASE("dimension mismatch is rejected") {
  CameraIntrinsics k = small_intrinsics();
  DepthMap d = DepthMap::constant(10, 10, 1.0);
  CHECK_THROWS_AS((void)depth_to_pointcloud(d, k), InvalidInputError);
}

TEST_CASE("back-projection round trip recovers the pixel") {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    CameraIntrinsics k;
    k.width = 200 + static_cast<int>(rng.uniform_below(600));
    k.height = 150 + static_cast<int>(rng.uniform_below(450));
    k.f_u = rng.uniform(200.0, 900.0);
    k.f_v = rng.uniform(200.0, 900.0);
    k.c_u = rng.uniform(0.25, 0.75) * k.width;
    k.c_v = rng.uniform(0.25, 0.75) * k.height;
    DepthMap d;
    d.width = k.width;
    d.height = k.height;
    d.depth.resize(static_cast<std::size_t>(k.width) * k.height);
    d.valid.assign(d.depth.size(), 1);
    for (double& z : d.depth) z = rng.uniform(0.2, 9.0);
    const PointCloud pc = depth_to_pointcloud(d, k);
    std::size_t i = 0;
    for (int v = 0; v < k.height; ++v) {
      for (int u = 0; u < k.width; ++u, ++i) {
        const Vec3& p = pc.points[i];
        const double u_back = p.x * k.f_u / p.z + k.c_u;
        const double v_back = p.y * k.f_v / p.z + k.c_v;
        worst = std::max({worst, std::abs(u_back - u), std::abs(v_back - v)});
      }
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("depth scaling scales the lifted cloud exactly") {
  CameraIntrinsics k = small_intrinsics();
  Rng rng(5);
  DepthMap d = DepthMap::constant(k.width, k.height, 1.0);
  for (double& z : d.depth) z = rng.uniform(0.5, 4.0);
  const double s = 2.0;  // representable scaling keeps products exact
  DepthMap scaled = d;
  for (double& z : scaled.depth) z *= s;
  const PointCloud a = depth_to_pointcloud(d, k);
  const PointCloud b = depth_to_pointcloud(scaled, k);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b.points[i].x == a.points[i].x * s);
    CHECK(b.points[i].y == a.points[i].y * s);
    CHECK(b.points[i].z == a.points[i].z * s);
  }
}

TEST_CASE("principal column and row lift to zero lateral offset") {
  CameraIntrinsics k = small_intrinsics();
  DepthMap d = DepthMap::constant(k.width, k.height, 3.0);
  const PointCloud pc = depth_to_pointcloud(d, k);
  for (int v = 0; v < k.height; ++v) {
    CHECK(pc.points[static_cast<std::size_t>(v) * k.width + 80].x == 0.0);
  }
  for (int u = 0; u < k.width; ++u) {
    CHECK(pc.points[static_cast<std::size_t>(60) * k.width + u].y == 0.0);
  }
}

TEST_CASE("box filter of a constant map is the identity") {
  DepthMap d = DepthMap::constant(24, 18, 2.0);
  const DepthMap out = convolve_depth(d, 5);
  for (std::size_t i = 0; i < d.depth.size(); ++i) {
    CHECK(out.depth[i] == 2.0);
  }
}

TEST_CASE("box filter averages a centered impulse") {
  DepthMap d = DepthMap::constant(3, 3, 0.0);
  d.depth[4] = 1.0;
  const DepthMap out = convolve_depth(d, 3);
  CHECK(out.depth[4] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  // Corner pixels only see their 2x2 in-bounds neighborhood.
  CHECK(out.depth[0] == doctest::Approx(1.0 / 4.0).epsilon(1e-15));
  // Edge midpoints see 2x3.
  CHECK(out.depth[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("box filter skips invalid neighbors and keeps the mask") {
  DepthMap d = DepthMap::constant(3, 1, 1.0);
  d.depth[2] = 7.0;
  d.valid[2] = 0;
  const DepthMap out = convolve_depth(d, 3);
  // Pixel 1 averages only the valid pixels {1.0, 1.0}.
  CHECK(out.depth[1] == 1.0);
  CHECK(out.valid[2] == 0);
  CHECK(out.valid[0] == 1);
}

TEST_CASE("even or tiny kernels are rejected") {
  DepthMap d = DepthMap::constant(8, 8, 1.0);
  CHECK_THROWS_AS((void)convolve_depth(d, 4), InvalidInputError);
  CHECK_THROWS_AS((void)convolve_depth(d, 1), InvalidInputError);
  CHECK_THROWS_AS((void)convolve_depth(d, -3), InvalidInputError);
}

TEST_CASE("interior mean of an all-valid constant region is preserved") {
  DepthMap d = DepthMap::constant(40, 30, 1.75);
  const DepthMap out = convolve_depth(d, 11);
  double mean = 0.0;
  int count = 0;
  for (int y = 5; y < 25; ++y) {
    for (int x = 5; x < 35; ++x) {
      mean += out.at(x, y);
      ++count;
    }
  }
  CHECK(mean / count == doctest::Approx(1.75).epsilon(1e-15));
}

TEST_CASE("smear metric identity and one-point displacement") {
  PointCloud a;
  a.points = {{0, 0, 1}};
  const SmearMetric self = smear_metric(a, a);
  CHECK(self.mean_displacement == 0.0);
  CHECK(self.max_displacement == 0.0);

  PointCloud b;
  b.points = {{0, 0, 2}};
  const SmearMetric moved = smear_metric(a, b);
  CHECK(moved.mean_displacement == 1.0);
  CHECK(moved.max_displacement == 1.0);

  PointCloud c;
  c.points = {{0, 0, 1}, {0, 0, 2}};
  CHECK_THROWS_AS((void)smear_metric(a, c), InvalidInputError);
}

TEST_CASE("convolving a depth step smears the lifted cloud") {
  const CameraIntrinsics k = small_intrinsics();
  const DepthMap step = two_plane_step(k.width, k.height, 1.0, 3.0);
  const PointCloud original = depth_to_pointcloud(step, k);

  double previous = -1.0;
  for (int kernel : {3, 5, 11}) {
    const DepthMap blurred = convolve_depth(step, kernel);
    const PointCloud smeared = depth_to_pointcloud(blurred, k);
    const SmearMetric m = smear_metric(original, smeared);
    CHECK(m.mean_displacement > 0.0);
    CHECK(m.mean_displacement >= previous);  // non-decreasing in kernel size
    previous = m.mean_displacement;
  }
  CHECK(previous > 0.01);
}

TEST_CASE("jet colormap endpoints and midpoint") {
  DepthMap d = DepthMap::constant(5, 1, 0.0);
  d.depth = {1.0, 1.5, 2.0, 2.5, 3.0};
  d.valid = {1, 1, 1, 1, 0};
  const ImageU8 img = jet_colormap(d);

  // Minimum valid depth: jet ramp start (0, 0, 0.5).
  CHECK(img.at(0, 0, 0) == 0);
  CHECK(img.at(0, 0, 1) == 0);
  CHECK(img.at(0, 0, 2) == 128);
  // Maximum valid depth (index 3 since index 4 is invalid): red end.
  CHECK(img.at(3, 0, 0) == 128);
  CHECK(img.at(3, 0, 1) == 0);
  CHECK(img.at(3, 0, 2) == 0);
  // Invalid pixel: black.
  CHECK(img.at(4, 0, 0) == 0);
  CHECK(img.at(4, 0, 2) == 0);

  // Depth at the middle of the valid range: green dominates.
  DepthMap mid = DepthMap::constant(3, 1, 0.0);
  mid.depth = {0.0, 0.5, 1.0};
  mid.valid = {1, 1, 1};
  const ImageU8 m = jet_colormap(mid);
  CHECK(m.at(1, 0, 1) == 255);
  CHECK(m.at(1, 0, 1) > m.at(1, 0, 0));
  CHECK(m.at(1, 0, 1) > m.at(1, 0, 2));
}

TEST_CASE("degenerate depth ranges are rejected by the colormap") {
  DepthMap constant_map = DepthMap::constant(4, 4, 2.0);
  CHECK_THROWS_AS((void)jet_colormap(constant_map), DegenerateInputError);
  DepthMap invalid_map = DepthMap::constant(4, 4, 2.0);
  invalid_map.valid.assign(invalid_map.valid.size(), 0);
  CHECK_THROWS_AS((void)jet_colormap(invalid_map), DegenerateInputError);
}

TEST_CASE("ply export and reparse round trip") {
  const CameraIntrinsics k = small_intrinsics();
  DepthMap d = DepthMap::constant(k.width, k.height, 1.2);
  d.valid[0] = 0;
  const PointCloud pc = depth_to_pointcloud(d, k);

  const std::string path = testutil::scratch_dir("ply") + "/cloud.ply";
  write_ply(path, pc);
  const PlyContents in = read_ply(path);
  REQUIRE(in.cloud.size() == pc.size());  // one vertex per valid pixel
  for (std::size_t i = 0; i < pc.size(); i += 97) {
    CHECK(std::abs(in.cloud.points[i].x - pc.points[i].x) < 1e-6);
    CHECK(std::abs(in.cloud.points[i].z - pc.points[i].z) < 1e-6);
  }

  std::vector<std::array<std::uint8_t, 3>> colors(pc.size(), {10, 200, 30});
  write_ply(path, pc, colors);
  const PlyContents colored = read_ply(path);
  REQUIRE(colored.colors.size() == pc.size());
  CHECK(colored.colors[5][1] == 200);
}
