// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero when any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fusionloc/data.hpp"
#include "fusionloc/errors.hpp"
#include "fusionloc/eval.hpp"
#include "fusionloc/geometry.hpp"
#include "fusionloc/models.hpp"
#include "fusionloc/pose.hpp"
#include "fusionloc/rng.hpp"
#include "fusionloc/sampling.hpp"
#include "fusionloc/train.hpp"

namespace fs = std::filesystem;
using namespace fusionloc;
using ad::Tensor;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }
  void note(const std::string& what) {
    detail << (detail.str().empty() ? "" : "; ") << what;
  }
};

// Reduced-width variants of the three architectures: same layer kinds and
// wiring as the defaults, sized so finite differences fit the time budget.
ModelConfig gradcheck_config(ModelKind kind) {
  ModelConfig c;
  c.kind = kind;
  c.init_seed = 11;
  c.sample_seed = 13;
  c.point.point_count = 64;
  c.point.sa = {{16, 0.8, 8, {16, 16}}, {4, 1.6, 8, {32, 32}}};
  c.point.global_widths = {32, 64};
  c.point.head_widths = {32};
  c.point.feature_dim = 64;
  c.rgb.image_size = 224;  // the image contract is fixed
  c.rgb.encoder_widths = {4, 8, 8, 16, 16};
  c.rgb.feature_dim = 64;
  c.fusion_widths = {64};
  return c;
}

std::vector<Vec3> random_points(Rng& rng, std::size_t n) {
  std::vector<Vec3> pts(n);
  for (Vec3& p : pts) {
    p = {rng.uniform(-1.5, 1.5), rng.uniform(-1.0, 1.0), rng.uniform(0.5, 4.0)};
  }
  return pts;
}

Tensor random_image(Rng& rng, std::size_t size) {
  std::vector<double> v(3 * size * size);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::constant({3, size, size}, std::move(v));
}

UnitQuaternion random_quaternion(Rng& rng) {
  const double a = rng.normal(), b = rng.normal(), c = rng.normal(),
               d = rng.normal();
  const double n = std::sqrt(a * a + b * b + c * c + d * d);
  return UnitQuaternion(a / n, {b / n, c / n, d / n});
}

// ---- criterion 1 -----------------------------------------------------------

void criterion_projection(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    CameraIntrinsics k;
    k.width = 64 + static_cast<int>(rng.uniform_below(1500));
    k.height = 64 + static_cast<int>(rng.uniform_below(1200));
    k.f_u = rng.uniform(150.0, 1500.0);
    k.f_v = rng.uniform(150.0, 1500.0);
    k.c_u = rng.uniform(0.1, 0.9) * k.width;
    k.c_v = rng.uniform(0.1, 0.9) * k.height;
    const int u = static_cast<int>(rng.uniform_below(k.width));
    const int v = static_cast<int>(rng.uniform_below(k.height));
    const double z = rng.uniform(0.05, 20.0);

    const double x = z * (u - k.c_u) / k.f_u;
    const double y = z * (v - k.c_v) / k.f_v;
    const double u_back = x * k.f_u / z + k.c_u;
    const double v_back = y * k.f_v / z + k.c_v;
    worst = std::max({worst, std::abs(u_back - u), std::abs(v_back - v)});
  }
  c.require(worst < 1e-6, "round-trip error " + std::to_string(worst));

  CameraIntrinsics k = default_intrinsics();
  DepthMap principal = DepthMap::constant(k.width, k.height, 2.0);
  const Vec3 p0 = depth_to_pointcloud(principal, k).points[240 * 640 + 320];
  c.require(p0.x == 0.0 && p0.y == 0.0 && p0.z == 2.0,
            "principal-point example not exact");

  CameraIntrinsics wide{585.0, 585.0, 320.0, 240.0, 1024, 480};
  DepthMap unit = DepthMap::constant(wide.width, wide.height, 1.0);
  const Vec3 p1 = depth_to_pointcloud(unit, wide).points[240 * 1024 + 905];
  c.require(p1.x == 1.0 && p1.y == 0.0 && p1.z == 1.0,
            "unit-offset example not exact");

  const double elapsed = seconds_since(start);
  c.require(elapsed < 1.0, "runtime " + std::to_string(elapsed) + "s >= 1s");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max %.2e px, %.2fs", worst, elapsed);
  c.note(buf);
}

// ---- criterion 2 -----------------------------------------------------------

struct FdResult {
  double max_rel = 0.0;
  std::size_t checked = 0;
};

FdResult finite_difference_suite(PoseRegressor& model, LossWeights& weights,
                                 const FrameInput& input, const Vec3& tt,
                                 const Vec3& tq, std::size_t coords,
                                 std::uint64_t seed) {
  auto loss_fn = [&]() {
    const PoseOutput out = model.forward(input);
    return pose_loss(out.t, out.logq, tt, tq, weights);
  };
  ad::ParameterStore& params = model.params();
  params.zero_grad();
  ad::backward(loss_fn());
  std::vector<std::vector<double>> analytic;
  for (const auto& p : params.all()) {
    analytic.emplace_back(p.value.grad().begin(), p.value.grad().end());
  }
  params.zero_grad();

  Rng rng(seed);
  FdResult result;
  const double h = 1e-5;
  for (std::size_t i = 0; i < coords; ++i) {
    std::size_t flat = rng.uniform_below(params.total_size());
    std::size_t pi = 0;
    while (flat >= params.all()[pi].value.numel()) {
      flat -= params.all()[pi].value.numel();
      ++pi;
    }
    Tensor t = params.all()[pi].value;
    auto theta = t.mutable_values();
    const double orig = theta[flat];
    theta[flat] = orig + h;
    const double up = loss_fn().item();
    theta[flat] = orig - h;
    const double down = loss_fn().item();
    theta[flat] = orig;
    const double fd = (up - down) / (2.0 * h);
    const double an = analytic[pi][flat];
    result.max_rel = std::max(
        result.max_rel,
        std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1.0}));
    ++result.checked;
  }
  return result;
}

void criterion_gradients(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  Rng data_rng(202);
  for (ModelKind kind : {ModelKind::FusionLoc, ModelKind::PointNetPose,
                         ModelKind::DepthPoseNet}) {
    const ModelConfig config = gradcheck_config(kind);
    PoseRegressor model(config);
    LossWeights w{model.params().create("loss.beta", {}, {0.1}),
                  model.params().create("loss.gamma", {}, {-2.0})};
    FrameInput input;
    if (model.needs_image()) input.image = random_image(data_rng, 224);
    if (model.needs_points()) {
      input.points = random_points(data_rng, config.point.point_count);
    }
    const FdResult fd = finite_difference_suite(
        model, w, input, {0.3, -0.4, 1.2}, {0.05, 0.1, -0.2}, 100,
        303 + static_cast<std::uint64_t>(kind));
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s max rel %.2e over %zu coords",
                  to_string(kind).c_str(), fd.max_rel, fd.checked);
    c.note(buf);
    c.require(fd.checked >= 100, "too few coordinates checked");
    c.require(fd.max_rel < 1e-4, std::string(to_string(kind)) +
                                     " rel err " + std::to_string(fd.max_rel));
  }
  const double elapsed = seconds_since(start);
  c.require(elapsed < 300.0, "runtime over 5 minutes");
  c.note(std::to_string(elapsed) + "s");
}

// ---- criterion 3 -----------------------------------------------------------

void criterion_loss_closed_forms(Check& c) {
  ad::ParameterStore store;
  LossWeights w{store.create("beta", {}, {0.8}), store.create("gamma", {}, {1.3})};

  // Zero residual: loss equals beta + gamma exactly.
  Tensor pt = Tensor::constant({3}, {0.4, -0.2, 2.0});
  Tensor pq = Tensor::constant({3}, {0.1, 0.0, -0.3});
  const double zero_res =
      pose_loss(pt, pq, {0.4, -0.2, 2.0}, {0.1, 0.0, -0.3}, w).item();
  c.require(zero_res == 0.8 + 1.3, "zero-residual loss != beta + gamma");

  // d loss / d beta = 1 - r_t e^{-beta}, against finite differences.
  const double beta0 = 0.8;
  const Vec3 true_t{0.0, 0.0, 0.0};
  const double r_t = 0.4 + 0.2 + 2.0;
  auto loss_at = [&](double beta_value) {
    ad::ParameterStore local;
    LossWeights lw{local.create("beta", {}, {beta_value}),
                   local.create("gamma", {}, {1.3})};
    return pose_loss(Tensor::constant({3}, {0.4, -0.2, 2.0}),
                     Tensor::constant({3}, {0.1, 0.0, -0.3}), true_t,
                     {0.1, 0.0, -0.3}, lw)
        .item();
  };
  store.zero_grad();
  ad::backward(pose_loss(pt, pq, true_t, {0.1, 0.0, -0.3}, w));
  const double analytic = w.beta.grad()[0];
  const double h = 1e-6;
  const double fd = (loss_at(beta0 + h) - loss_at(beta0 - h)) / (2.0 * h);
  c.require(std::abs(analytic - fd) < 1e-8,
            "d/dbeta vs finite differences: " + std::to_string(analytic - fd));
  const double closed = 1.0 - r_t * std::exp(-beta0);
  c.require(std::abs(analytic - closed) < 1e-12, "closed form mismatch");

  // Stationarity at beta = ln r_t.
  ad::ParameterStore stat;
  LossWeights sw{stat.create("beta", {}, {std::log(r_t)}),
                 stat.create("gamma", {}, {0.0})};
  stat.zero_grad();
  ad::backward(pose_loss(Tensor::constant({3}, {0.4, -0.2, 2.0}),
                         Tensor::constant({3}, {0.0, 0.0, 0.0}), true_t,
                         {0.0, 0.0, 0.0}, sw));
  c.require(std::abs(sw.beta.grad()[0]) < 1e-6,
            "stationarity residual " + std::to_string(sw.beta.grad()[0]));
}

// ---- criterion 4 -----------------------------------------------------------

void criterion_quaternions(Check& c) {
  Rng rng(404);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const UnitQuaternion q = random_quaternion(rng);
    const UnitQuaternion back = quat_exp(quat_log(q));
    worst = std::max({worst, std::abs(back.u() - q.u()),
                      std::abs(back.v().x - q.v().x),
                      std::abs(back.v().y - q.v().y),
                      std::abs(back.v().z - q.v().z)});
  }
  c.require(worst < 1e-9, "exp(log) round trip " + std::to_string(worst));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "round trip max %.2e", worst);
  c.note(buf);

  const double kPi = 3.14159265358979323846;
  const double s = std::sqrt(0.5);
  const Vec3 w0 = quat_log(UnitQuaternion::identity());
  c.require(w0.norm() < 1e-12, "identity log");
  const Vec3 w1 = quat_log(UnitQuaternion(s, {0, 0, s}));
  c.require(std::abs(w1.z - kPi / 4.0) < 1e-12 && std::abs(w1.x) < 1e-12 &&
                std::abs(w1.y) < 1e-12,
            "90-degree z log");
  const Vec3 w2 = quat_log(UnitQuaternion(0.0, {1, 0, 0}));
  c.require(std::abs(w2.x - kPi / 2.0) < 1e-12 && std::abs(w2.y) < 1e-12 &&
                std::abs(w2.z) < 1e-12,
            "180-degree x log");
}

// ---- criterion 5 -----------------------------------------------------------

void criterion_permutation_invariance(Check& c) {
  ModelConfig config = gradcheck_config(ModelKind::PointNetPose);
  config.point.point_count = 128;
  config.point.sa = {{32, 0.8, 8, {16, 16}}, {8, 1.6, 8, {32, 32}}};
  ad::ParameterStore store;
  Rng init_rng(config.init_seed);
  PointStream stream(store, "point", config.point, config.sample_seed, init_rng);

  Rng rng(505);
  std::vector<Vec3> pts = random_points(rng, config.point.point_count);
  const Tensor base = stream.forward(pts);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec3> shuffled = pts;
    Rng shuffler(600 + trial);
    shuffler.shuffle(shuffled);
    const Tensor out = stream.forward(shuffled);
    for (std::size_t i = 0; i < out.numel(); ++i) {
      worst = std::max(worst, std::abs(out.value(i) - base.value(i)));
    }
  }
  c.require(worst < 1e-9, "max-norm change " + std::to_string(worst));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "100 permutations, max change %.2e", worst);
  c.note(buf);
}

// ---- criterion 6 -----------------------------------------------------------

double covering_radius(const PointCloud& pc, const std::vector<std::size_t>& sel) {
  double worst = 0.0;
  for (const Vec3& p : pc.points) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s : sel) best = std::min(best, distance(p, pc.points[s]));
    worst = std::max(worst, best);
  }
  return worst;
}

void criterion_fps_oracle(Check& c) {
  Rng rng(606);
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t size = 4 + rng.uniform_below(7);
    PointCloud pc;
    for (std::size_t i = 0; i < size; ++i) {
      pc.points.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2),
                           rng.uniform(-2, 2)});
    }
    const std::size_t n = 1 + rng.uniform_below(size);
    const auto sel = farthest_point_sample(pc, n, rng.next_u64());
    const double achieved = covering_radius(pc, sel);

    // Brute force over all size-n subsets.
    std::vector<bool> mask(size, false);
    std::fill(mask.end() - n, mask.end(), true);
    double optimal = std::numeric_limits<double>::infinity();
    do {
      std::vector<std::size_t> subset;
      for (std::size_t i = 0; i < size; ++i) {
        if (mask[i]) subset.push_back(i);
      }
      optimal = std::min(optimal, covering_radius(pc, subset));
    } while (std::next_permutation(mask.begin(), mask.end()));

    if (achieved > 2.0 * optimal + 1e-12) ++failures;
  }
  c.require(failures == 0,
            std::to_string(failures) + " clouds exceeded the 2x bound");
  c.note("200 clouds within the 2-approximation bound");
}

// ---- criterion 7 -----------------------------------------------------------

void criterion_smearing(Check& c) {
  CameraIntrinsics k{150.0, 150.0, 80.0, 60.0, 160, 120};

  DepthMap step = DepthMap::constant(k.width, k.height, 1.0);
  for (int y = 0; y < k.height; ++y) {
    for (int x = k.width / 2; x < k.width; ++x) {
      step.depth[static_cast<std::size_t>(y) * k.width + x] = 3.0;
    }
  }
  const PointCloud original = depth_to_pointcloud(step, k);
  double previous = -1.0;
  double mean11 = 0.0;
  bool monotone = true;
  for (int kernel : {3, 5, 11}) {
    const PointCloud smeared =
        depth_to_pointcloud(convolve_depth(step, kernel), k);
    const double mean = smear_metric(original, smeared).mean_displacement;
    if (mean < previous) monotone = false;
    previous = mean;
    if (kernel == 11) mean11 = mean;
  }
  c.require(mean11 > 0.01,
            "step-scene mean displacement " + std::to_string(mean11));
  c.require(monotone, "displacement not monotone over kernels 3, 5, 11");

  DepthMap flat = DepthMap::constant(k.width, k.height, 2.0);
  const PointCloud flat_cloud = depth_to_pointcloud(flat, k);
  const PointCloud flat_smeared =
      depth_to_pointcloud(convolve_depth(flat, 11), k);
  const double flat_mean =
      smear_metric(flat_cloud, flat_smeared).mean_displacement;
  c.require(flat_mean < 1e-9,
            "constant-scene displacement " + std::to_string(flat_mean));
  char buf[96];
  std::snprintf(buf, sizeof(buf), "step 11x11 mean %.4f m, constant %.1e m",
                mean11, flat_mean);
  c.note(buf);
}

// ---- criterion 8 -----------------------------------------------------------

void criterion_desk_scale_learning(Check& c) {
  const auto start = std::chrono::steady_clock::now();

  // (a) PointNet-Pose overfits 5 synthetic frames within 2000 Adam steps.
  {
    TrainOptions opt;
    opt.model = compact_model_config(ModelKind::PointNetPose);
    opt.model.init_seed = 21;
    opt.data.synthetic = true;
    opt.data.synthetic_frames = 5;
    opt.data.synthetic_test_every = 0;  // all five frames train
    opt.data.synthetic_seed = 71;
    opt.seed = 72;
    opt.batch_size = 5;  // one Adam step per epoch
    opt.lr = 2e-3;
    opt.weight_decay = 0.0;
    opt.stop_on_convergence = false;

    ad::AdamConfig adam;
    adam.lr = opt.lr;
    adam.weight_decay = opt.weight_decay;
    TrainState state(opt.model, adam);
    SampleSet samples = load_samples(opt.data, opt.model, opt.seed);

    double t_med = 1e9, r_med = 1e9;
    std::size_t steps = 0;
    const std::size_t chunk = 250;
    while (steps < 2000) {
      // Stepped decay settles Adam once it starts bouncing near the optimum.
      state.optimizer.set_lr(steps < 750 ? opt.lr
                                         : (steps < 1500 ? opt.lr * 0.25
                                                         : opt.lr * 0.05));
      TrainOptions chunk_opt = opt;
      chunk_opt.max_epochs = state.next_epoch + chunk;
      train_model(chunk_opt, state);
      steps = state.optimizer.step_count();
      const EvalReport train_report =
          evaluate_model(state.model, samples.train, opt.seed);
      t_med = train_report.overall_translation_m;
      r_med = train_report.overall_rotation_deg;
      if (t_med <= 0.02 && r_med <= 2.0) break;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "overfit: %.4f m, %.2f deg after %zu steps", t_med, r_med,
                  steps);
    c.note(buf);
    c.require(steps <= 2000 && t_med <= 0.02 && r_med <= 2.0,
              "pointnet-pose did not overfit to 0.02 m / 2 deg in 2000 steps");
  }

  // (b) FusionLoc on 50 synthetic frames beats the untrained model and the
  // constant mean-pose predictor on 10 held-out interpolated frames.
  {
    TrainOptions opt;
    opt.model = compact_model_config(ModelKind::FusionLoc);
    opt.model.init_seed = 31;
    opt.data.synthetic = true;
    opt.data.synthetic_frames = 60;  // 50 train + 10 interleaved test
    opt.data.synthetic_test_every = 6;
    opt.data.synthetic_seed = 81;
    opt.seed = 82;
    opt.batch_size = 10;
    opt.lr = 1e-3;
    opt.weight_decay = 5e-4;
    opt.stop_on_convergence = false;
    opt.max_epochs = 60;

    ad::AdamConfig adam;
    adam.lr = opt.lr;
    adam.weight_decay = opt.weight_decay;

    SampleSet samples = load_samples(opt.data, opt.model, opt.seed);
    c.require(samples.train.size() == 50, "expected 50 training frames");
    c.require(samples.test.size() == 10, "expected 10 held-out frames");

    // Baselines before training.
    PoseRegressor untrained(opt.model);
    const EvalReport untrained_report =
        evaluate_model(untrained, samples.test, opt.seed);
    const EvalReport mean_report =
        evaluate_constant(samples.test, mean_pose(samples.train));

    TrainState state(opt.model, adam);
    train_model(opt, state);
    const EvalReport trained =
        evaluate_model(state.model, samples.test, opt.seed);

    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "fusionloc %.3f m / %.2f deg vs untrained %.3f m / %.2f deg, "
                  "mean-pose %.3f m / %.2f deg",
                  trained.overall_translation_m, trained.overall_rotation_deg,
                  untrained_report.overall_translation_m,
                  untrained_report.overall_rotation_deg,
                  mean_report.overall_translation_m,
                  mean_report.overall_rotation_deg);
    c.note(buf);
    c.require(trained.overall_translation_m <
                      untrained_report.overall_translation_m &&
                  trained.overall_rotation_deg <
                      untrained_report.overall_rotation_deg,
              "did not beat the untrained model on both medians");
    c.require(trained.overall_translation_m < mean_report.overall_translation_m &&
                  trained.overall_rotation_deg < mean_report.overall_rotation_deg,
              "did not beat the mean-pose predictor on both medians");
  }

  const double elapsed = seconds_since(start);
  c.require(elapsed < 1800.0, "runtime over 30 minutes");
  c.note(std::to_string(static_cast<int>(elapsed)) + "s");
}

// ---- criterion 9 -----------------------------------------------------------

void criterion_report_format(Check& c) {
  // Full-dataset accuracy needs pretrained-encoder, GPU-scale training and is
  // out of scope at desk scale; what is checked here is that the harness
  // emits per-scene medians in the published "Xm, Y°" convention so full
  // runs are directly comparable, and that the repo documents the
  // substitution.
  std::vector<TrainSample> samples(4);
  samples[0].scene = "alpha";
  samples[1].scene = "alpha";
  samples[2].scene = "beta";
  samples[3].scene = "beta";
  for (auto& s : samples) s.target_pose = Pose{{0, 0, 0}, UnitQuaternion::identity()};
  std::vector<Pose> preds(4);
  preds[0] = {{0.2, 0.0, 0.0}, quat_exp({0.0, 0.0, 0.05})};
  preds[1] = {{0.26, 0.0, 0.0}, quat_exp({0.0, 0.0, 0.08})};
  preds[2] = {{0.0, 0.4, 0.0}, quat_exp({0.1, 0.0, 0.0})};
  preds[3] = {{0.0, 0.44, 0.0}, quat_exp({0.12, 0.0, 0.0})};
  const EvalReport report = evaluate_predictions(samples, preds);
  const std::string table = report.to_table();

  const std::regex line_format("^(\\S+) +[0-9]+\\.[0-9]{2}m, [0-9]+\\.[0-9]{2}°$");
  std::istringstream is(table);
  std::string line;
  std::size_t rows = 0;
  bool has_average = false;
  while (std::getline(is, line)) {
    c.require(std::regex_match(line, line_format),
              "row not in Xm, Y° format: '" + line + "'");
    has_average = has_average || line.rfind("Average", 0) == 0;
    ++rows;
  }
  c.require(rows == 3, "expected two scene rows plus the Average row");
  c.require(has_average, "missing the Average row");

  const char* repo = std::getenv("FUSIONLOC_REPO_DIR");
  c.require(repo != nullptr, "FUSIONLOC_REPO_DIR not set");
  if (repo) {
    std::ifstream readme(fs::path(repo) / "README.md");
    std::stringstream ss;
    ss << readme.rdbuf();
    const std::string text = ss.str();
    c.require(text.find("desk scale") != std::string::npos,
              "README does not document the desk-scale substitution");
    c.require(text.find("Xm, Y°") != std::string::npos,
              "README does not document the report convention");
  }
  c.note("published-scale absolute numbers substituted by format-compatible "
         "desk-scale reports");
}

// ---- criterion 10 ----------------------------------------------------------

void criterion_golden_ingestion(Check& c) {
  const char* golden_env = std::getenv("FUSIONLOC_GOLDEN_DIR");
  c.require(golden_env != nullptr, "FUSIONLOC_GOLDEN_DIR not set");
  if (!golden_env) return;
  const fs::path golden(golden_env);
  std::ifstream is(golden / "expected.json");
  c.require(is.good(), "missing golden expected.json");
  if (!is.good()) return;
  nlohmann::json expected;
  is >> expected;

  const CameraIntrinsics k = default_intrinsics();
  std::size_t frames = 0;
  for (const auto& ef : expected.at("frames")) {
    const std::string stem =
        (golden / "mini_scene" / "seq-01" / ef.at("stem").get<std::string>())
            .string();
    const Frame frame = load_frame(stem + ".color.png", stem + ".depth.png",
                                   stem + ".pose.txt", k);
    for (const auto& probe : ef.at("depth_probes")) {
      const int x = probe.at("x").get<int>();
      const int y = probe.at("y").get<int>();
      const int mm = probe.at("mm").get<int>();
      if (mm == 0 || mm == 65535) {
        c.require(!frame.depth.is_valid(x, y), "sentinel not invalidated");
      } else {
        c.require(frame.depth.is_valid(x, y) &&
                      std::llround(frame.depth.at(x, y) * 1000.0) == mm,
                  "depth integer mismatch");
      }
    }
    const auto& t = ef.at("t");
    const auto& q = ef.at("q");
    c.require(std::abs(frame.pose.t.x - t.at(0).get<double>()) < 1e-12 &&
                  std::abs(frame.pose.t.y - t.at(1).get<double>()) < 1e-12 &&
                  std::abs(frame.pose.t.z - t.at(2).get<double>()) < 1e-12,
              "pose translation mismatch");
    c.require(std::abs(frame.pose.q.u() - q.at(0).get<double>()) < 1e-12 &&
                  std::abs(frame.pose.q.v().x - q.at(1).get<double>()) < 1e-12 &&
                  std::abs(frame.pose.q.v().y - q.at(2).get<double>()) < 1e-12 &&
                  std::abs(frame.pose.q.v().z - q.at(3).get<double>()) < 1e-12,
              "pose quaternion mismatch");
    const int valid = static_cast<int>(
        std::count(frame.depth.valid.begin(), frame.depth.valid.end(), 1));
    c.require(valid == ef.at("valid_count").get<int>(), "valid count mismatch");
    ++frames;
  }
  c.require(frames == 3, "expected a 3-frame miniature scene");
  c.note("3 frames, exact depth integers and 1e-12 poses");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Check&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "projection correctness", criterion_projection},
      {2, "gradient suite", criterion_gradients},
      {3, "loss closed-form checks", criterion_loss_closed_forms},
      {4, "quaternion suite", criterion_quaternions},
      {5, "permutation invariance", criterion_permutation_invariance},
      {6, "fps covering-radius oracle", criterion_fps_oracle},
      {7, "smearing experiment", criterion_smearing},
      {8, "desk-scale learning", criterion_desk_scale_learning},
      {9, "report format and scale substitution", criterion_report_format},
      {10, "golden ingestion files", criterion_golden_ingestion},
  };

  int failed = 0;
  for (const auto& criterion : criteria) {
    Check check;
    try {
      criterion.run(check);
    } catch (const std::exception& e) {
      check.ok = false;
      check.note(std::string("exception: ") + e.what());
    }
    std::printf("%s criterion %d: %s%s%s\n", check.ok ? "PASS" : "FAIL",
                criterion.id, criterion.name,
                check.detail.str().empty() ? "" : " - ",
                check.detail.str().c_str());
    std::fflush(stdout);
    if (!check.ok) ++failed;
  }
  if (failed) {
    std::printf("%d criterion(s) failed\n", failed);
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
