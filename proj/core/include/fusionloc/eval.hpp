#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fusionloc/models.hpp"
#include "fusionloc/train.hpp"

namespace fusionloc {

struct FrameErrors {
  std::string scene;
  int index = 0;
  double translation_m = 0.0;
  double rotation_deg = 0.0;
};

struct SceneMedians {
  std::string scene;
  std::size_t frame_count = 0;
  double translation_m = 0.0;
  double rotation_deg = 0.0;
};

struct EvalReport {
  std::vector<FrameErrors> frames;
  std::vector<SceneMedians> scenes;
  double overall_translation_m = 0.0;  // median over all frames
  double overall_rotation_deg = 0.0;
  double average_translation_m = 0.0;  // mean of per-scene medians
  double average_rotation_deg = 0.0;

  nlohmann::json to_json() const;
  // Aligned text table, one "Xm, Y°" median entry per scene plus an
  // Average row.
  std::string to_table() const;
};

// Per-frame errors of a predictor over the given samples.
EvalReport evaluate_predictions(const std::vector<TrainSample>& samples,
                                const std::vector<Pose>& predictions);

// Runs the model on each sample with eval-mode preprocessing.
EvalReport evaluate_model(const PoseRegressor& model,
                          const std::vector<TrainSample>& samples,
                          std::uint64_t seed);

std::vector<Pose> predict_poses(const PoseRegressor& model,
                                const std::vector<TrainSample>& samples,
                                std::uint64_t seed);

// Constant predictor baselines.
Pose mean_pose(const std::vector<TrainSample>& samples);
EvalReport evaluate_constant(const std::vector<TrainSample>& samples,
                             const Pose& constant);

}  // namespace fusionloc
