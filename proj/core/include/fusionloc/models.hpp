#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fusionloc/autodiff.hpp"
#include "fusionloc/model_config.hpp"
#include "fusionloc/pose.hpp"
#include "fusionloc/rng.hpp"
#include "fusionloc/vec3.hpp"

namespace fusionloc {

// Shared-weight perceptron applied to each row of a {N, in} matrix (or to a
// single {in} vector). Hidden layers use ReLU; the output layer is ReLU or
// linear depending on linear_tail.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ad::ParameterStore& store, const std::string& prefix, std::size_t in_dim,
      const std::vector<std::size_t>& widths, bool linear_tail, Rng& rng);

  ad::Tensor forward(const ad::Tensor& rows) const;
  std::size_t out_dim() const { return out_dim_; }

 private:
  std::vector<ad::Tensor> weights_;  // {in, out} each
  std::vector<ad::Tensor> biases_;   // {out}
  bool linear_tail_ = false;
  std::size_t out_dim_ = 0;
};

// Self-attention over the entries of a feature vector: scores from two
// linear embeddings, row-softmax, applied to a third embedding, plus a
// residual connection back to the input.
class Attention {
 public:
  Attention() = default;
  Attention(ad::ParameterStore& store, const std::string& prefix,
            std::size_t dim, Rng& rng);

  ad::Tensor forward(const ad::Tensor& x) const;

 private:
  ad::Tensor w_theta_, w_phi_, w_g_;  // {C, C}
  std::size_t dim_ = 0;
};

// Compact strided convolutional encoder -> flatten -> fully connected ->
// self-attention. Input is a {3, S, S} image tensor.
class ImageStream {
 public:
  ImageStream() = default;
  ImageStream(ad::ParameterStore& store, const std::string& prefix,
              const RgbStreamConfig& config, Rng& rng);

  ad::Tensor forward(const ad::Tensor& image) const;

  // Encoder + fully connected output, before attention.
  ad::Tensor pre_attention_feature(const ad::Tensor& image) const;

  // Drop-in alternative to the trainable encoder: a precomputed feature
  // (same dimension as the encoder output) goes through the attention
  // module only.
  ad::Tensor forward_from_feature(const ad::Tensor& feature) const;

  std::size_t feature_dim() const { return config_.feature_dim; }

 private:
  RgbStreamConfig config_;
  std::vector<ad::Tensor> conv_w_, conv_b_;
  ad::Tensor fc_w_, fc_b_;
  Attention attention_;
  std::size_t flat_dim_ = 0;
};

// Set-abstraction layers followed by a per-point perceptron, a global max
// pool and a post-pool perceptron. The input point order is canonicalized
// internally, so the feature is a function of the point set. No input or
// feature transform modules anywhere: rigid motions of the cloud change the
// feature, which is what pose regression needs.
class PointStream {
 public:
  PointStream() = default;
  PointStream(ad::ParameterStore& store, const std::string& prefix,
              const PointStreamConfig& config, std::uint64_t sample_seed,
              Rng& rng);

  ad::Tensor forward(std::span<const Vec3> points) const;

  std::size_t feature_dim() const { return config_.feature_dim; }

 private:
  PointStreamConfig config_;
  std::uint64_t sample_seed_ = 0;
  std::vector<Mlp> sa_mlps_;
  Mlp global_mlp_;
  Mlp head_mlp_;
};

// Two linear regression heads: position and log-quaternion orientation.
struct PoseOutput {
  ad::Tensor t;     // {3}
  ad::Tensor logq;  // {3}

  Pose decode() const;
};

class PoseHead {
 public:
  PoseHead() = default;
  PoseHead(ad::ParameterStore& store, const std::string& prefix,
           std::size_t in_dim, Rng& rng);

  PoseOutput forward(const ad::Tensor& feature) const;

 private:
  ad::Tensor wt_, bt_, wq_, bq_;
};

struct FrameInput {
  ad::Tensor image;          // {3, S, S}; undefined when unused
  ad::Tensor image_feature;  // precomputed encoder feature; replaces image
  std::vector<Vec3> points;  // empty when unused
};

// Dual-stream pose regressor: image stream and point stream features are
// concatenated and passed through fully connected layers to the pose heads.
class FusionLocModel {
 public:
  FusionLocModel(const ModelConfig& config, ad::ParameterStore& store);

  PoseOutput forward(const ad::Tensor& image, std::span<const Vec3> points) const;
  PoseOutput forward(const FrameInput& input) const;

  const ImageStream& rgb_stream() const { return rgb_; }
  const PointStream& point_stream() const { return point_; }

 private:
  ImageStream rgb_;
  PointStream point_;
  Mlp fused_;
  PoseHead head_;
};

// Point stream plus a direct regression head.
class PointNetPoseModel {
 public:
  PointNetPoseModel(const ModelConfig& config, ad::ParameterStore& store);

  PoseOutput forward(std::span<const Vec3> points) const;

  const PointStream& point_stream() const { return point_; }

 private:
  PointStream point_;
  PoseHead head_;
};

// Image stream over jet-colormapped depth plus a direct regression head.
class DepthPoseNetModel {
 public:
  DepthPoseNetModel(const ModelConfig& config, ad::ParameterStore& store);

  PoseOutput forward(const ad::Tensor& jet_image) const;
  PoseOutput forward(const FrameInput& input) const;

  const ImageStream& image_stream() const { return stream_; }

 private:
  ImageStream stream_;
  PoseHead head_;
};

// Owns the parameter store and one of the three networks.
class PoseRegressor {
 public:
  explicit PoseRegressor(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  ad::ParameterStore& params() { return store_; }
  const ad::ParameterStore& params() const { return store_; }

  // Trainable parameter count of the network itself.
  std::size_t parameter_count() const { return model_param_count_; }

  bool needs_image() const { return config_.kind != ModelKind::PointNetPose; }
  bool needs_points() const { return config_.kind != ModelKind::DepthPoseNet; }

  PoseOutput forward(const FrameInput& input) const;

  const FusionLocModel* fusionloc() const {
    return fusion_ ? &*fusion_ : nullptr;
  }
  const PointNetPoseModel* pointnet_pose() const {
    return pointnet_ ? &*pointnet_ : nullptr;
  }
  const DepthPoseNetModel* depth_posenet() const {
    return depth_ ? &*depth_ : nullptr;
  }

 private:
  ModelConfig config_;
  ad::ParameterStore store_;
  std::optional<FusionLocModel> fusion_;
  std::optional<PointNetPoseModel> pointnet_;
  std::optional<DepthPoseNetModel> depth_;
  std::size_t model_param_count_ = 0;
};

}  // namespace fusionloc
