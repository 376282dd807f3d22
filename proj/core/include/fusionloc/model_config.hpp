#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fusionloc/toml.hpp"

namespace fusionloc {

enum class ModelKind { FusionLoc, PointNetPose, DepthPoseNet };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// One set-abstraction layer: sample centroids, group neighbors within a
// radius, run a shared perceptron, max-pool each group.
struct SaLayerConfig {
  std::size_t centroids = 0;
  double radius = 0.0;
  std::size_t neighbors = 0;              // K
  std::vector<std::size_t> widths;        // shared perceptron widths
};

struct PointStreamConfig {
  std::size_t point_count = 1024;
  std::vector<SaLayerConfig> sa;
  std::vector<std::size_t> global_widths; // per-point perceptron, ends at feature_dim
  std::vector<std::size_t> head_widths;   // post-pool hidden widths; a final
                                          // linear projection restores feature_dim
  std::size_t feature_dim = 1024;

  void validate() const;
};

struct RgbStreamConfig {
  std::size_t image_size = 224;
  std::vector<std::size_t> encoder_widths;  // stride-2 3x3 conv blocks
  std::size_t feature_dim = 1024;           // FC output and attention dim

  void validate() const;
};

struct ModelConfig {
  ModelKind kind = ModelKind::FusionLoc;
  std::uint64_t init_seed = 1;    // weight initialization stream
  std::uint64_t sample_seed = 1;  // farthest-point sampling stream
  PointStreamConfig point;
  RgbStreamConfig rgb;
  std::vector<std::size_t> fusion_widths = {1024};  // fused FC stack

  void validate() const;
  std::size_t fused_input_dim() const {
    return point.feature_dim + rgb.feature_dim;
  }
};

// Full-width defaults (1024-point stream, 1024-dim features).
ModelConfig default_model_config(ModelKind kind);

// Small preset that trains in minutes on a CPU; same architecture shape.
ModelConfig compact_model_config(ModelKind kind);

ModelConfig model_config_from_toml(const toml::Value& root);
ModelConfig load_model_config(const std::string& path);
std::string model_config_to_toml(const ModelConfig& config);

nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace fusionloc
