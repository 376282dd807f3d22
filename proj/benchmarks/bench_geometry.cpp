#include <benchmark/benchmark.h>

#include "fusionloc/data.hpp"
#include "fusionloc/geometry.hpp"
#include "fusionloc/rng.hpp"

using namespace fusionloc;

namespace {

DepthMap make_depth(int width, int height) {
  Rng rng(1);
  DepthMap d = DepthMap::constant(width, height, 1.0);
  for (double& z : d.depth) z = rng.uniform(0.5, 6.0);
  return d;
}

}  // namespace

static void BM_DepthToPointcloud(benchmark::State& state) {
  CameraIntrinsics k = default_intrinsics();
  const DepthMap d = make_depth(k.width, k.height);
  for (auto _ : state) {
    benchmark::DoNotOptimize(depth_to_pointcloud(d, k));
  }
  state.SetItemsProcessed(state.iterations() * d.depth.size());
}
BENCHMARK(BM_DepthToPointcloud);

static void BM_ConvolveDepth(benchmark::State& state) {
  const DepthMap d = make_depth(640, 480);
  const int kernel = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(convolve_depth(d, kernel));
  }
}
BENCHMARK(BM_ConvolveDepth)->Arg(3)->Arg(11);

static void BM_JetColormap(benchmark::State& state) {
  const DepthMap d = make_depth(640, 480);
  for (auto _ : state) {
    benchmark::DoNotOptimize(jet_colormap(d));
  }
}
BENCHMARK(BM_JetColormap);
