#include "fusionloc/model_config.hpp"

#include <sstream>

#include "fusionloc/errors.hpp"

namespace fusionloc {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::FusionLoc: return "fusionloc";
    case ModelKind::PointNetPose: return "pointnet-pose";
    case ModelKind::DepthPoseNet: return "depth-posenet";
  }
  return "fusionloc";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "fusionloc") return ModelKind::FusionLoc;
  if (name == "pointnet-pose") return ModelKind::PointNetPose;
  if (name == "depth-posenet") return ModelKind::DepthPoseNet;
  throw InvalidInputError("unknown model kind '" + name +
                          "' (expected fusionloc, pointnet-pose or depth-posenet)");
}

void PointStreamConfig::validate() const {
  if (point_count == 0) {
    throw InvalidInputError("model config: point_count must be positive");
  }
  if (feature_dim == 0) {
    throw InvalidInputError("model config: feature_dim must be positive");
  }
  std::size_t prev = point_count;
  for (const auto& layer : sa) {
    if (layer.centroids == 0 || layer.centroids >= prev) {
      throw InvalidInputError(
          "model config: SA centroid counts must be strictly decreasing "
          "and below the point count");
    }
    if (!(layer.radius > 0.0) || layer.neighbors == 0 || layer.widths.empty()) {
      throw InvalidInputError("model config: bad SA layer");
    }
    prev = layer.centroids;
  }
  if (global_widths.empty() || global_widths.back() != feature_dim) {
    throw InvalidInputError(
        "model config: global perceptron must end at feature_dim");
  }
}

void RgbStreamConfig::validate() const {
  if (encoder_widths.empty()) {
    throw InvalidInputError("model config: encoder needs at least one block");
  }
  std::size_t spatial = image_size;
  for (std::size_t i = 0; i < encoder_widths.size(); ++i) {
    spatial = (spatial + 1) / 2;  // stride-2, pad-1, 3x3
    if (spatial == 0 || encoder_widths[i] == 0) {
      throw InvalidInputError("model config: encoder shrinks image to nothing");
    }
  }
  if (feature_dim == 0) {
    throw InvalidInputError("model config: feature_dim must be positive");
  }
}

void ModelConfig::validate() const {
  point.validate();
  rgb.validate();
  if (kind == ModelKind::FusionLoc && fusion_widths.empty()) {
    throw InvalidInputError("model config: fusion head needs at least one width");
  }
}

ModelConfig default_model_config(ModelKind kind) {
  ModelConfig c;
  c.kind = kind;
  c.point.point_count = 1024;
  c.point.sa = {
      {256, 0.2, 32, {64, 64, 128}},
      {64, 0.4, 64, {128, 128, 256}},
  };
  c.point.global_widths = {256, 512, 1024};
  c.point.head_widths = {512, 256};
  c.point.feature_dim = 1024;
  c.rgb.image_size = 224;
  c.rgb.encoder_widths = {32, 64, 128, 256, 256};
  c.rgb.feature_dim = 1024;
  c.fusion_widths = {1024};
  return c;
}

ModelConfig compact_model_config(ModelKind kind) {
  ModelConfig c;
  c.kind = kind;
  c.point.point_count = 128;
  c.point.sa = {
      {32, 0.6, 8, {32, 32}},
      {8, 1.2, 8, {64, 64}},
  };
  c.point.global_widths = {64, 128};
  c.point.head_widths = {64};
  c.point.feature_dim = 128;
  c.rgb.image_size = 224;
  c.rgb.encoder_widths = {8, 16, 16, 32, 32};
  c.rgb.feature_dim = 128;
  c.fusion_widths = {128};
  return c;
}

namespace {

std::vector<std::size_t> size_array(const toml::Value& v) {
  std::vector<std::size_t> out;
  for (const auto& e : v.as_array()) {
    const auto x = e.as_int();
    if (x < 0) throw InvalidInputError("model config: negative width");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

}  // namespace

ModelConfig model_config_from_toml(const toml::Value& root) {
  ModelConfig c = default_model_config(
      model_kind_from_string(root.get_string("model", "fusionloc")));
  c.init_seed = static_cast<std::uint64_t>(root.get_int("init_seed", 1));
  c.sample_seed = static_cast<std::uint64_t>(root.get_int("sample_seed", 1));

  if (root.contains("points")) {
    const auto& p = root.at("points");
    c.point.point_count =
        static_cast<std::size_t>(p.get_int("count", static_cast<std::int64_t>(
                                                        c.point.point_count)));
    c.point.feature_dim = static_cast<std::size_t>(p.get_int(
        "feature_dim", static_cast<std::int64_t>(c.point.feature_dim)));
    if (p.contains("sa")) {
      c.point.sa.clear();
      for (const auto& layer : p.at("sa").as_array()) {
        SaLayerConfig sa;
        sa.centroids = static_cast<std::size_t>(layer.at("centroids").as_int());
        sa.radius = layer.at("radius").as_double();
        sa.neighbors = static_cast<std::size_t>(layer.at("neighbors").as_int());
        sa.widths = size_array(layer.at("widths"));
        c.point.sa.push_back(std::move(sa));
      }
    }
    if (p.contains("global_widths")) {
      c.point.global_widths = size_array(p.at("global_widths"));
    }
    if (p.contains("head_widths")) {
      c.point.head_widths = size_array(p.at("head_widths"));
    }
  }
  if (root.contains("rgb")) {
    const auto& r = root.at("rgb");
    c.rgb.image_size = static_cast<std::size_t>(
        r.get_int("image_size", static_cast<std::int64_t>(c.rgb.image_size)));
    if (r.contains("encoder_widths")) {
      c.rgb.encoder_widths = size_array(r.at("encoder_widths"));
    }
    c.rgb.feature_dim = static_cast<std::size_t>(r.get_int(
        "feature_dim", static_cast<std::int64_t>(c.rgb.feature_dim)));
  }
  if (root.contains("fusion")) {
    const auto& f = root.at("fusion");
    if (f.contains("widths")) c.fusion_widths = size_array(f.at("widths"));
  }
  c.validate();
  return c;
}

ModelConfig load_model_config(const std::string& path) {
  return model_config_from_toml(toml::parse_file(path));
}

namespace {

void write_array(std::ostream& os, const char* key,
                 const std::vector<std::size_t>& v) {
  os << key << " = [";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << "]\n";
}

}  // namespace

std::string model_config_to_toml(const ModelConfig& config) {
  std::ostringstream os;
  os << "model = \"" << to_string(config.kind) << "\"\n";
  os << "init_seed = " << config.init_seed << "\n";
  os << "sample_seed = " << config.sample_seed << "\n\n";
  os << "[points]\n";
  os << "count = " << config.point.point_count << "\n";
  os << "feature_dim = " << config.point.feature_dim << "\n";
  write_array(os, "global_widths", config.point.global_widths);
  write_array(os, "head_widths", config.point.head_widths);
  for (const auto& sa : config.point.sa) {
    os << "\n[[points.sa]]\n";
    os << "centroids = " << sa.centroids << "\n";
    os << "radius = " << sa.radius << "\n";
    os << "neighbors = " << sa.neighbors << "\n";
    write_array(os, "widths", sa.widths);
  }
  os << "\n[rgb]\n";
  os << "image_size = " << config.rgb.image_size << "\n";
  os << "feature_dim = " << config.rgb.feature_dim << "\n";
  write_array(os, "encoder_widths", config.rgb.encoder_widths);
  os << "\n[fusion]\n";
  write_array(os, "widths", config.fusion_widths);
  return os.str();
}

nlohmann::json model_config_to_json(const ModelConfig& config) {
  nlohmann::json j;
  j["model"] = to_string(config.kind);
  j["init_seed"] = config.init_seed;
  j["sample_seed"] = config.sample_seed;
  j["points"] = {{"count", config.point.point_count},
                 {"feature_dim", config.point.feature_dim},
                 {"global_widths", config.point.global_widths},
                 {"head_widths", config.point.head_widths}};
  nlohmann::json sa = nlohmann::json::array();
  for (const auto& layer : config.point.sa) {
    sa.push_back({{"centroids", layer.centroids},
                  {"radius", layer.radius},
                  {"neighbors", layer.neighbors},
                  {"widths", layer.widths}});
  }
  j["points"]["sa"] = sa;
  j["rgb"] = {{"image_size", config.rgb.image_size},
              {"encoder_widths", config.rgb.encoder_widths},
              {"feature_dim", config.rgb.feature_dim}};
  j["fusion"] = {{"widths", config.fusion_widths}};
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.kind = model_kind_from_string(j.at("model").get<std::string>());
  c.init_seed = j.at("init_seed").get<std::uint64_t>();
  c.sample_seed = j.at("sample_seed").get<std::uint64_t>();
  const auto& p = j.at("points");
  c.point.point_count = p.at("count").get<std::size_t>();
  c.point.feature_dim = p.at("feature_dim").get<std::size_t>();
  c.point.global_widths = p.at("global_widths").get<std::vector<std::size_t>>();
  c.point.head_widths = p.at("head_widths").get<std::vector<std::size_t>>();
  c.point.sa.clear();
  for (const auto& layer : p.at("sa")) {
    SaLayerConfig sa;
    sa.centroids = layer.at("centroids").get<std::size_t>();
    sa.radius = layer.at("radius").get<double>();
    sa.neighbors = layer.at("neighbors").get<std::size_t>();
    sa.widths = layer.at("widths").get<std::vector<std::size_t>>();
    c.point.sa.push_back(std::move(sa));
  }
  const auto& r = j.at("rgb");
  c.rgb.image_size = r.at("image_size").get<std::size_t>();
  c.rgb.encoder_widths = r.at("encoder_widths").get<std::vector<std::size_t>>();
  c.rgb.feature_dim = r.at("feature_dim").get<std::size_t>();
  c.fusion_widths = j.at("fusion").at("widths").get<std::vector<std::size_t>>();
  c.validate();
  return c;
}

}  // namespace fusionloc
