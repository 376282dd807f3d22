#include "fusionloc/models.hpp"

#include <algorithm>
#include <numeric>

#include "fusionloc/errors.hpp"
#include "fusionloc/sampling.hpp"

namespace fusionloc {

using ad::Tensor;

// ---- Mlp -------------------------------------------------------------------

Mlp::Mlp(ad::ParameterStore& store, const std::string& prefix, std::size_t in_dim,
         const std::vector<std::size_t>& widths, bool linear_tail, Rng& rng)
    : linear_tail_(linear_tail) {
  if (widths.empty()) {
    throw InvalidInputError("mlp: needs at least one layer: " + prefix);
  }
  std::size_t in = in_dim;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const std::size_t out = widths[i];
    const std::string base = prefix + ".fc" + std::to_string(i);
    weights_.push_back(store.create(
        base + ".w", {in, out},
        ad::kaiming_uniform(in * out, in, rng.next_u64())));
    biases_.push_back(store.create(
        base + ".b", {out}, ad::bias_uniform(out, in, rng.next_u64())));
    in = out;
  }
  out_dim_ = in;
}

Tensor Mlp::forward(const Tensor& rows) const {
  Tensor x = rows;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    x = ad::add(ad::matmul(x, weights_[i]), biases_[i]);
    if (i + 1 < weights_.size() || !linear_tail_) x = ad::relu(x);
  }
  return x;
}

// ---- Attention --------------------------------------------------------------

Attention::Attention(ad::ParameterStore& store, const std::string& prefix,
                     std::size_t dim, Rng& rng)
    : dim_(dim) {
  w_theta_ = store.create(prefix + ".theta", {dim, dim},
                          ad::kaiming_uniform(dim * dim, dim, rng.next_u64()));
  w_phi_ = store.create(prefix + ".phi", {dim, dim},
                        ad::kaiming_uniform(dim * dim, dim, rng.next_u64()));
  w_g_ = store.create(prefix + ".g", {dim, dim},
                      ad::kaiming_uniform(dim * dim, dim, rng.next_u64()));
}

Tensor Attention::forward(const Tensor& x) const {
  if (x.shape().size() != 1 || x.shape()[0] != dim_) {
    throw InvalidInputError("attention: expected a length-" +
                            std::to_string(dim_) + " feature vector");
  }
  Tensor e_theta = ad::matmul(w_theta_, x);                      // {C}
  Tensor e_phi = ad::matmul(w_phi_, x);                          // {C}
  Tensor scores = ad::matmul(ad::reshape(e_theta, {dim_, 1}),
                             ad::reshape(e_phi, {1, dim_}));     // {C,C}
  Tensor attn = ad::softmax(scores, 1);
  Tensor value = ad::matmul(w_g_, x);                            // {C}
  Tensor y = ad::matmul(attn, value);                            // {C}
  return ad::add(x, y);
}

// ---- ImageStream -------------------------------------------------------------

ImageStream::ImageStream(ad::ParameterStore& store, const std::string& prefix,
                         const RgbStreamConfig& config, Rng& rng)
    : config_(config) {
  config_.validate();
  std::size_t channels = 3;
  std::size_t spatial = config_.image_size;
  for (std::size_t i = 0; i < config_.encoder_widths.size(); ++i) {
    const std::size_t out = config_.encoder_widths[i];
    const std::string base = prefix + ".conv" + std::to_string(i);
    const std::size_t fan_in = channels * 9;
    conv_w_.push_back(store.create(
        base + ".w", {out, channels, 3, 3},
        ad::kaiming_uniform(out * channels * 9, fan_in, rng.next_u64())));
    conv_b_.push_back(store.create(
        base + ".b", {out}, ad::bias_uniform(out, fan_in, rng.next_u64())));
    channels = out;
    spatial = (spatial + 1) / 2;
  }
  flat_dim_ = channels * spatial * spatial;
  fc_w_ = store.create(prefix + ".fc.w", {flat_dim_, config_.feature_dim},
                       ad::kaiming_uniform(flat_dim_ * config_.feature_dim,
                                           flat_dim_, rng.next_u64()));
  fc_b_ = store.create(prefix + ".fc.b", {config_.feature_dim},
                       ad::bias_uniform(config_.feature_dim, flat_dim_,
                                        rng.next_u64()));
  attention_ = Attention(store, prefix + ".attn", config_.feature_dim, rng);
}

Tensor ImageStream::pre_attention_feature(const Tensor& image) const {
  const ad::Shape expected = {3, config_.image_size, config_.image_size};
  if (image.shape() != expected) {
    throw InvalidInputError("image stream: expected image shape " +
                            ad::shape_str(expected) + ", got " +
                            ad::shape_str(image.shape()));
  }
  Tensor x = image;
  for (std::size_t i = 0; i < conv_w_.size(); ++i) {
    x = ad::relu(ad::conv2d(x, conv_w_[i], conv_b_[i], 2, 1));
  }
  x = ad::reshape(x, {flat_dim_});
  return ad::relu(ad::add(ad::matmul(x, fc_w_), fc_b_));
}

Tensor ImageStream::forward(const Tensor& image) const {
  return attention_.forward(pre_attention_feature(image));
}

Tensor ImageStream::forward_from_feature(const Tensor& feature) const {
  if (feature.shape() != ad::Shape{config_.feature_dim}) {
    throw InvalidInputError("image stream: precomputed feature must have length " +
                            std::to_string(config_.feature_dim));
  }
  return attention_.forward(feature);
}

// ---- PointStream --------------------------------------------------------------

PointStream::PointStream(ad::ParameterStore& store, const std::string& prefix,
                         const PointStreamConfig& config,
                         std::uint64_t sample_seed, Rng& rng)
    : config_(config), sample_seed_(sample_seed) {
  config_.validate();
  std::size_t channels = 0;  // feature channels entering each SA layer
  for (std::size_t i = 0; i < config_.sa.size(); ++i) {
    sa_mlps_.emplace_back(store, prefix + ".sa" + std::to_string(i),
                          3 + channels, config_.sa[i].widths,
                          /*linear_tail=*/false, rng);
    channels = config_.sa[i].widths.back();
  }
  // Group rows are centroid-relative, so the per-point perceptron gets each
  // surviving point's absolute camera-frame coordinates alongside its
  // features: rigid motions of the cloud must change the pose feature.
  global_mlp_ = Mlp(store, prefix + ".h", 3 + channels, config_.global_widths,
                    /*linear_tail=*/false, rng);
  std::vector<std::size_t> head = config_.head_widths;
  head.push_back(config_.feature_dim);  // final projection back to feature_dim
  head_mlp_ = Mlp(store, prefix + ".theta", config_.feature_dim, head,
                  /*linear_tail=*/true, rng);
}

Tensor PointStream::forward(std::span<const Vec3> points) const {
  if (points.size() != config_.point_count) {
    throw InvalidInputError(
        "point stream: expected " + std::to_string(config_.point_count) +
        " points, got " + std::to_string(points.size()));
  }

  // Canonicalize the input order so the feature depends only on the point
  // set; downstream sampling seeds then see a permutation-free view.
  PointCloud cloud;
  cloud.points.assign(points.begin(), points.end());
  std::sort(cloud.points.begin(), cloud.points.end(),
            [](const Vec3& a, const Vec3& b) {
              if (a.x != b.x) return a.x < b.x;
              if (a.y != b.y) return a.y < b.y;
              return a.z < b.z;
            });

  Tensor feats;  // {N, C}, undefined while C == 0
  for (std::size_t layer = 0; layer < config_.sa.size(); ++layer) {
    const SaLayerConfig& sa = config_.sa[layer];
    const auto centroid_idx = farthest_point_sample(
        cloud, sa.centroids, derive_seed(sample_seed_, layer));
    const GroupedPoints groups =
        ball_query_group(cloud, {}, 0, centroid_idx, sa.radius, sa.neighbors);

    std::vector<Tensor> pooled;
    pooled.reserve(sa.centroids);
    const std::size_t k = groups.group_size;
    for (std::size_t ci = 0; ci < sa.centroids; ++ci) {
      std::vector<double> rel(k * 3);
      std::vector<std::size_t> members(k);
      for (std::size_t s = 0; s < k; ++s) {
        const Vec3& r = groups.relative[ci * k + s];
        rel[s * 3 + 0] = r.x;
        rel[s * 3 + 1] = r.y;
        rel[s * 3 + 2] = r.z;
        members[s] = groups.member_indices[ci * k + s];
      }
      Tensor rows = Tensor::constant({k, 3}, std::move(rel));
      if (feats.defined()) {
        rows = ad::concat({rows, ad::gather_rows(feats, members)}, 1);
      }
      Tensor local = sa_mlps_[layer].forward(rows);         // {K, C'}
      Tensor mx = ad::max_over_set(local, 0);               // {C'}
      pooled.push_back(ad::reshape(mx, {1, sa_mlps_[layer].out_dim()}));
    }
    feats = ad::concat(pooled, 0);  // {N', C'}

    PointCloud next;
    next.points = groups.centroids;
    cloud = std::move(next);
  }

  std::vector<double> raw(cloud.size() * 3);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    raw[i * 3 + 0] = cloud.points[i].x;
    raw[i * 3 + 1] = cloud.points[i].y;
    raw[i * 3 + 2] = cloud.points[i].z;
  }
  Tensor rows = Tensor::constant({cloud.size(), 3}, std::move(raw));
  if (feats.defined()) {
    rows = ad::concat({rows, feats}, 1);
  }
  Tensor per_point = global_mlp_.forward(rows);     // {N'', feature_dim}
  Tensor pooled = ad::max_over_set(per_point, 0);   // {feature_dim}
  return head_mlp_.forward(pooled);
}

// ---- heads and models ----------------------------------------------------------

Pose PoseOutput::decode() const {
  Pose pose;
  pose.t = {t.value(0), t.value(1), t.value(2)};
  pose.q = quat_exp({logq.value(0), logq.value(1), logq.value(2)});
  return pose;
}

PoseHead::PoseHead(ad::ParameterStore& store, const std::string& prefix,
                   std::size_t in_dim, Rng& rng) {
  wt_ = store.create(prefix + ".t.w", {in_dim, 3},
                     ad::kaiming_uniform(in_dim * 3, in_dim, rng.next_u64()));
  bt_ = store.create(prefix + ".t.b", {3},
                     ad::bias_uniform(3, in_dim, rng.next_u64()));
  wq_ = store.create(prefix + ".q.w", {in_dim, 3},
                     ad::kaiming_uniform(in_dim * 3, in_dim, rng.next_u64()));
  bq_ = store.create(prefix + ".q.b", {3},
                     ad::bias_uniform(3, in_dim, rng.next_u64()));
}

PoseOutput PoseHead::forward(const Tensor& feature) const {
  return {ad::add(ad::matmul(feature, wt_), bt_),
          ad::add(ad::matmul(feature, wq_), bq_)};
}

FusionLocModel::FusionLocModel(const ModelConfig& config,
                               ad::ParameterStore& store) {
  config.validate();
  Rng rng(config.init_seed);
  rgb_ = ImageStream(store, "rgb", config.rgb, rng);
  point_ = PointStream(store, "point", config.point, config.sample_seed, rng);
  fused_ = Mlp(store, "fused", config.fused_input_dim(), config.fusion_widths,
               /*linear_tail=*/false, rng);
  head_ = PoseHead(store, "head", config.fusion_widths.back(), rng);
}

PoseOutput FusionLocModel::forward(const Tensor& image,
                                   std::span<const Vec3> points) const {
  Tensor f_rgb = rgb_.forward(image);
  Tensor f_pc = point_.forward(points);
  Tensor fused = fused_.forward(ad::concat({f_rgb, f_pc}, 0));
  return head_.forward(fused);
}

PoseOutput FusionLocModel::forward(const FrameInput& input) const {
  Tensor f_rgb = input.image_feature.defined()
                     ? rgb_.forward_from_feature(input.image_feature)
                     : rgb_.forward(input.image);
  Tensor f_pc = point_.forward(input.points);
  Tensor fused = fused_.forward(ad::concat({f_rgb, f_pc}, 0));
  return head_.forward(fused);
}

PointNetPoseModel::PointNetPoseModel(const ModelConfig& config,
                                     ad::ParameterStore& store) {
  config.point.validate();
  Rng rng(config.init_seed);
  point_ = PointStream(store, "point", config.point, config.sample_seed, rng);
  head_ = PoseHead(store, "head", config.point.feature_dim, rng);
}

PoseOutput PointNetPoseModel::forward(std::span<const Vec3> points) const {
  return head_.forward(point_.forward(points));
}

DepthPoseNetModel::DepthPoseNetModel(const ModelConfig& config,
                                     ad::ParameterStore& store) {
  config.rgb.validate();
  Rng rng(config.init_seed);
  stream_ = ImageStream(store, "depthnet", config.rgb, rng);
  head_ = PoseHead(store, "head", config.rgb.feature_dim, rng);
}

PoseOutput DepthPoseNetModel::forward(const Tensor& jet_image) const {
  return head_.forward(stream_.forward(jet_image));
}

PoseOutput DepthPoseNetModel::forward(const FrameInput& input) const {
  return head_.forward(input.image_feature.defined()
                           ? stream_.forward_from_feature(input.image_feature)
                           : stream_.forward(input.image));
}

PoseRegressor::PoseRegressor(const ModelConfig& config) : config_(config) {
  config_.validate();
  switch (config_.kind) {
    case ModelKind::FusionLoc:
      fusion_.emplace(config_, store_);
      break;
    case ModelKind::PointNetPose:
      pointnet_.emplace(config_, store_);
      break;
    case ModelKind::DepthPoseNet:
      depth_.emplace(config_, store_);
      break;
  }
  model_param_count_ = store_.total_size();
}

PoseOutput PoseRegressor::forward(const FrameInput& input) const {
  switch (config_.kind) {
    case ModelKind::FusionLoc:
      return fusion_->forward(input);
    case ModelKind::PointNetPose:
      return pointnet_->forward(input.points);
    case ModelKind::DepthPoseNet:
      return depth_->forward(input);
  }
  throw InvalidInputError("pose regressor: unknown model kind");
}

}  // namespace fusionloc
