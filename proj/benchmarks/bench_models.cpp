#include <benchmark/benchmark.h>

#include "fusionloc/models.hpp"
#include "fusionloc/pose.hpp"
#include "fusionloc/rng.hpp"

using namespace fusionloc;

namespace {

std::vector<Vec3> make_points(std::size_t n) {
  Rng rng(3);
  std::vector<Vec3> pts(n);
  for (Vec3& p : pts) {
    p = {rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(0.5, 5)};
  }
  return pts;
}

ad::Tensor make_image(std::size_t size) {
  Rng rng(4);
  std::vector<double> v(3 * size * size);
  for (double& x : v) x = rng.uniform(-1, 1);
  return ad::Tensor::constant({3, size, size}, std::move(v));
}

}  // namespace

static void BM_PointNetPoseForward(benchmark::State& state) {
  const ModelConfig config = compact_model_config(ModelKind::PointNetPose);
  PoseRegressor model(config);
  FrameInput input;
  input.points = make_points(config.point.point_count);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.forward(input));
  }
}
BENCHMARK(BM_PointNetPoseForward);

static void BM_FusionLocForwardBackward(benchmark::State& state) {
  const ModelConfig config = compact_model_config(ModelKind::FusionLoc);
  PoseRegressor model(config);
  LossWeights w{model.params().create("loss.beta", {}, {0.0}),
                model.params().create("loss.gamma", {}, {-3.0})};
  FrameInput input;
  input.points = make_points(config.point.point_count);
  input.image = make_image(config.rgb.image_size);
  for (auto _ : state) {
    const PoseOutput out = model.forward(input);
    ad::backward(pose_loss(out.t, out.logq, {0.5, 0.0, 1.0}, {0.1, 0.0, 0.0}, w));
    model.params().zero_grad();
  }
}
BENCHMARK(BM_FusionLocForwardBackward);

static void BM_DefaultPointStreamForward(benchmark::State& state) {
  const ModelConfig config = default_model_config(ModelKind::PointNetPose);
  PoseRegressor model(config);
  FrameInput input;
  input.points = make_points(config.point.point_count);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.forward(input));
  }
}
BENCHMARK(BM_DefaultPointStreamForward);
