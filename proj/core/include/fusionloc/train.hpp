#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fusionloc/data.hpp"
#include "fusionloc/models.hpp"
#include "fusionloc/optim.hpp"

namespace fusionloc {

// Where frames come from: a dataset directory in the standard layout, or an
// in-memory synthetic scene.
struct DataConfig {
  std::string data_root;              // empty when synthetic
  bool synthetic = false;
  std::size_t synthetic_frames = 60;
  std::size_t synthetic_test_every = 6;
  std::uint64_t synthetic_seed = 42;
  std::vector<std::string> scenes;    // empty = all scenes found
  CameraIntrinsics intrinsics = default_intrinsics();
  // Directory mirroring the dataset layout with one .feature.bin per frame;
  // when set, image models consume these precomputed features instead of
  // running the trainable encoder.
  std::string feature_root;
};

// One frame prepared for the networks: fixed point subsample, target pose,
// and the raw image for per-epoch cropping.
struct TrainSample {
  ImageU8 rgb;              // empty for point-only models
  DepthMap depth;           // kept for jet-colormap models
  std::vector<double> rgb_feature;  // precomputed encoder feature, optional
  std::vector<Vec3> points;
  Vec3 target_t;
  Vec3 target_logq;
  Pose target_pose;
  std::string scene;
  int index = 0;
};

// Loads and prepares the train/test samples for a model kind. Point
// subsampling is seeded per frame, so inputs are stable across epochs.
struct SampleSet {
  std::vector<TrainSample> train;
  std::vector<TrainSample> test;
};
SampleSet load_samples(const DataConfig& data, const ModelConfig& model,
                       std::uint64_t seed);

// Builds the graph input for one sample. Train mode applies the seeded
// random crop; eval mode uses the center crop. Depth-map models receive the
// jet-colormapped depth instead of the color image.
FrameInput make_input(const TrainSample& sample, const ModelConfig& model,
                      bool train_mode, std::uint64_t crop_seed);

struct TrainOptions {
  ModelConfig model;
  DataConfig data;
  std::uint64_t seed = 0;
  std::size_t max_epochs = 200;
  std::size_t batch_size = 64;
  double lr = 1e-4;
  double weight_decay = 5e-4;
  // Stop when the 10-epoch moving average of the train loss improves by
  // less than 0.1%.
  bool stop_on_convergence = true;
  std::string out_dir;              // checkpoints + metrics; empty = no files
  std::string resume_checkpoint;    // empty = fresh start
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::string checkpoint_path;  // empty when out_dir is empty
  std::size_t epochs_run = 0;
  bool converged = false;
};

// Runs the training loop; deterministic for fixed options. The returned
// regressor holds the trained parameters.
struct TrainState {
  PoseRegressor model;
  LossWeights loss_weights;
  ad::Adam optimizer;
  std::size_t next_epoch = 0;

  explicit TrainState(const ModelConfig& config, const ad::AdamConfig& adam);
};

TrainResult train_model(const TrainOptions& options, TrainState& state,
                        std::ostream* progress = nullptr);

// Checkpoint layout shared by the trainer, the evaluator and the CLI.
void save_train_checkpoint(const std::string& path, const TrainState& state,
                           std::size_t completed_epochs,
                           const nlohmann::json& extra_meta);
TrainState load_train_checkpoint(const std::string& path,
                                 const ad::AdamConfig& adam);
ModelConfig checkpoint_model_config(const std::string& path);

constexpr double kLossBetaInit = 0.0;
constexpr double kLossGammaInit = -3.0;

}  // namespace fusionloc
