#include <benchmark/benchmark.h>

#include "fusionloc/rng.hpp"
#include "fusionloc/sampling.hpp"

using namespace fusionloc;

namespace {

PointCloud make_cloud(std::size_t n) {
  Rng rng(2);
  PointCloud pc;
  pc.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    pc.points.push_back({rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(0.5, 5)});
  }
  return pc;
}

}  // namespace

static void BM_FarthestPointSample(benchmark::State& state) {
  const PointCloud pc = make_cloud(1024);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(farthest_point_sample(pc, n, 7));
  }
}
BENCHMARK(BM_FarthestPointSample)->Arg(64)->Arg(256);

static void BM_BallQueryGroup(benchmark::State& state) {
  const PointCloud pc = make_cloud(1024);
  const auto centroids = farthest_point_sample(pc, 256, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ball_query_group(pc, {}, 0, centroids, 0.2, 32));
  }
}
BENCHMARK(BM_BallQueryGroup);

static void BM_RandomSample(benchmark::State& state) {
  const PointCloud pc = make_cloud(220000);  // roughly one dense frame
  for (auto _ : state) {
    benchmark::DoNotOptimize(random_sample(pc, 1024, 7));
  }
}
BENCHMARK(BM_RandomSample);
