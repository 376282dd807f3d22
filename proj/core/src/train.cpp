#include "fusionloc/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <cstdio>
#include <numeric>

#include "fusionloc/checkpoint.hpp"
#include "fusionloc/errors.hpp"
#include "fusionloc/rng.hpp"

namespace fs = std::filesystem;

namespace fusionloc {

namespace {

constexpr std::uint64_t kPointSeedTag = 0x70u;
constexpr std::uint64_t kShuffleSeedTag = 0x5au;
constexpr std::uint64_t kCropSeedTag = 0xc2u;

TrainSample make_sample(const Frame& frame, const DataConfig& data,
                        const ModelConfig& model, std::uint64_t seed,
                        std::size_t global_index) {
  TrainSample s;
  if (model.kind != ModelKind::PointNetPose) {
    s.rgb = frame.rgb;
    s.depth = frame.depth;
    if (!data.feature_root.empty()) {
      char stem[32];
      std::snprintf(stem, sizeof(stem), "frame-%06d", frame.index);
      const fs::path path = fs::path(data.feature_root) / frame.scene /
                            frame.sequence / (std::string(stem) + ".feature.bin");
      s.rgb_feature = load_feature_file(path.string());
    }
  }
  if (model.kind != ModelKind::DepthPoseNet) {
    const PointCloud pc =
        frame_to_pointset(frame, data.intrinsics, model.point.point_count,
                          derive_seed(seed, kPointSeedTag, global_index));
    s.points = pc.points;
  }
  s.target_pose = frame.pose;
  s.target_t = frame.pose.t;
  s.target_logq = quat_log(frame.pose.q);
  s.scene = frame.scene.empty() ? std::string("synthetic") : frame.scene;
  s.index = frame.index;
  return s;
}

}  // namespace

SampleSet load_samples(const DataConfig& data, const ModelConfig& model,
                       std::uint64_t seed) {
  SampleSet out;
  std::size_t global_index = 0;
  if (data.synthetic) {
    SynthScene scene = synth_scene(data.synthetic_seed, data.synthetic_frames);
    for (std::size_t i = 0; i < scene.frames.size(); ++i) {
      Frame& frame = scene.frames[i];
      frame.scene = "synthetic";
      const bool is_test = data.synthetic_test_every > 0 &&
                           (i % data.synthetic_test_every) ==
                               data.synthetic_test_every / 2;
      TrainSample s = make_sample(frame, data, model, seed, global_index++);
      (is_test ? out.test : out.train).push_back(std::move(s));
    }
    return out;
  }

  const auto scenes = index_dataset(data.data_root);
  for (const auto& [name, split] : scenes) {
    if (!data.scenes.empty() &&
        std::find(data.scenes.begin(), data.scenes.end(), name) ==
            data.scenes.end()) {
      continue;
    }
    for (const FrameFiles& files : split.train) {
      const Frame frame = load_frame_files(files, data.intrinsics);
      out.train.push_back(make_sample(frame, data, model, seed, global_index++));
    }
    for (const FrameFiles& files : split.test) {
      const Frame frame = load_frame_files(files, data.intrinsics);
      out.test.push_back(make_sample(frame, data, model, seed, global_index++));
    }
  }
  if (out.train.empty()) {
    throw IngestionError("no training frames found");
  }
  return out;
}

FrameInput make_input(const TrainSample& sample, const ModelConfig& model,
                      bool train_mode, std::uint64_t crop_seed) {
  FrameInput input;
  if (model.kind != ModelKind::PointNetPose && !sample.rgb_feature.empty()) {
    input.image_feature = ad::Tensor::constant({sample.rgb_feature.size()},
                                               sample.rgb_feature);
  } else if (model.kind == ModelKind::DepthPoseNet) {
    input.image = preprocess_image(jet_colormap(sample.depth), train_mode, crop_seed);
  } else if (model.kind == ModelKind::FusionLoc) {
    input.image = preprocess_image(sample.rgb, train_mode, crop_seed);
  }
  if (model.kind != ModelKind::DepthPoseNet) {
    input.points = sample.points;
  }
  return input;
}

TrainState::TrainState(const ModelConfig& config, const ad::AdamConfig& adam)
    : model(config), optimizer(adam) {
  loss_weights.beta = model.params().create("loss.beta", {}, {kLossBetaInit});
  loss_weights.gamma = model.params().create("loss.gamma", {}, {kLossGammaInit});
}

void save_train_checkpoint(const std::string& path, const TrainState& state,
                           std::size_t completed_epochs,
                           const nlohmann::json& extra_meta) {
  Checkpoint ckpt;
  ckpt.meta = extra_meta;
  ckpt.meta["model_config"] = model_config_to_json(state.model.config());
  ckpt.meta["completed_epochs"] = completed_epochs;
  ckpt.meta["adam_step"] = state.optimizer.step_count();
  append_parameters(ckpt, state.model.params(), "param.");
  const auto& params = state.model.params().all();
  const auto& m = state.optimizer.first_moments();
  const auto& v = state.optimizer.second_moments();
  for (std::size_t i = 0; i < m.size(); ++i) {
    ckpt.blobs.push_back({"adam.m." + params[i].name,
                          params[i].value.shape(), m[i]});
    ckpt.blobs.push_back({"adam.v." + params[i].name,
                          params[i].value.shape(), v[i]});
  }
  write_checkpoint(path, ckpt);
}

ModelConfig checkpoint_model_config(const std::string& path) {
  const Checkpoint ckpt = read_checkpoint(path);
  if (!ckpt.meta.contains("model_config")) {
    throw IngestionError("checkpoint " + path + " carries no model config");
  }
  return model_config_from_json(ckpt.meta.at("model_config"));
}

TrainState load_train_checkpoint(const std::string& path,
                                 const ad::AdamConfig& adam) {
  const Checkpoint ckpt = read_checkpoint(path);
  if (!ckpt.meta.contains("model_config")) {
    throw IngestionError("checkpoint " + path + " carries no model config");
  }
  TrainState state(model_config_from_json(ckpt.meta.at("model_config")), adam);
  restore_parameters(ckpt, state.model.params(), "param.");
  state.next_epoch = ckpt.meta.value("completed_epochs", 0u);

  const auto& params = state.model.params().all();
  std::vector<std::vector<double>> m, v;
  bool have_moments = true;
  for (const auto& p : params) {
    const CheckpointBlob* bm = ckpt.find("adam.m." + p.name);
    const CheckpointBlob* bv = ckpt.find("adam.v." + p.name);
    if (!bm || !bv) {
      have_moments = false;
      break;
    }
    m.push_back(bm->values);
    v.push_back(bv->values);
  }
  if (have_moments && !params.empty()) {
    state.optimizer.restore(ckpt.meta.value("adam_step", 0u), std::move(m),
                            std::move(v));
  }
  return state;
}

TrainResult train_model(const TrainOptions& options, TrainState& state,
                        std::ostream* progress) {
  if (options.batch_size < 1) {
    throw InvalidInputError("train: batch size must be >= 1");
  }
  const ModelConfig& model_config = state.model.config();
  SampleSet samples = load_samples(options.data, model_config, options.seed);

  std::ofstream metrics;
  std::string checkpoint_path;
  if (!options.out_dir.empty()) {
    fs::create_directories(options.out_dir);
    checkpoint_path = (fs::path(options.out_dir) / "checkpoint.flck").string();
    metrics.open(fs::path(options.out_dir) / "metrics.jsonl",
                 state.next_epoch > 0 ? std::ios::app : std::ios::out);
  }

  TrainResult result;
  std::vector<double> losses;  // per finished epoch, for the stop rule
  const std::size_t window = 10;

  for (std::size_t epoch = state.next_epoch; epoch < options.max_epochs; ++epoch) {
    std::vector<std::size_t> order(samples.train.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(options.seed, kShuffleSeedTag, epoch));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size();
         start += options.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      try {
        for (std::size_t i = start; i < end; ++i) {
          const TrainSample& sample = samples.train[order[i]];
          const FrameInput input = make_input(
              sample, model_config, /*train_mode=*/true,
              derive_seed(derive_seed(options.seed, kCropSeedTag, epoch),
                          order[i]));
          const PoseOutput out = state.model.forward(input);
          const ad::Tensor loss =
              pose_loss(out.t, out.logq, sample.target_t, sample.target_logq,
                        state.loss_weights);
          epoch_loss += loss.item();
          ad::backward(ad::scalar_mul(loss, inv));
        }
      } catch (const NumericError& e) {
        throw NumericError("train: non-finite loss in epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + e.what());
      }
      state.optimizer.step(state.model.params());
    }
    epoch_loss /= static_cast<double>(samples.train.size());

    EpochRecord record{epoch, epoch_loss, state.loss_weights.beta.value(0),
                       state.loss_weights.gamma.value(0)};
    result.history.push_back(record);
    losses.push_back(epoch_loss);
    ++result.epochs_run;

    if (metrics.is_open()) {
      nlohmann::json line = {{"epoch", record.epoch},
                             {"loss", record.loss},
                             {"beta", record.beta},
                             {"gamma", record.gamma}};
      metrics << line.dump() << "\n";
      metrics.flush();
    }
    if (progress) {
      (*progress) << "epoch " << epoch << " loss " << epoch_loss << " beta "
                  << record.beta << " gamma " << record.gamma << "\n";
    }
    if (!checkpoint_path.empty()) {
      save_train_checkpoint(checkpoint_path, state, epoch + 1,
                            {{"seed", options.seed}});
    }

    // Convergence: consecutive 10-epoch moving averages within 0.1%.
    if (options.stop_on_convergence && losses.size() > window) {
      const auto ma = [&](std::size_t end_exclusive) {
        double s = 0.0;
        for (std::size_t i = end_exclusive - window; i < end_exclusive; ++i) {
          s += losses[i];
        }
        return s / window;
      };
      const double prev = ma(losses.size() - 1);
      const double cur = ma(losses.size());
      if (std::abs(prev) > 0.0 && (prev - cur) / std::abs(prev) < 1e-3) {
        result.converged = true;
        break;
      }
    }
  }

  state.next_epoch = state.next_epoch + result.epochs_run;
  result.checkpoint_path = checkpoint_path;
  return result;
}

}  // namespace fusionloc
