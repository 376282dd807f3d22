#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "fusionloc/geometry.hpp"

namespace fusionloc {

// Uniform subsample of n points. Without replacement when the cloud has at
// least n points, with replacement otherwise; deterministic for a fixed
// seed. Throws DegenerateInputError on an empty cloud.
PointCloud random_sample(const PointCloud& pc, std::size_t n, std::uint64_t seed);

// Iterative farthest point sampling. The first index is a seeded uniform
// draw; each following index maximizes the minimum distance to the points
// already chosen, ties broken by lowest index. Returns n distinct indices.
std::vector<std::size_t> farthest_point_sample(const PointCloud& pc,
                                               std::size_t n,
                                               std::uint64_t seed);

// Same, with the first index forced.
std::vector<std::size_t> farthest_point_sample_from(const PointCloud& pc,
                                                    std::size_t n,
                                                    std::size_t first);

// One local region per centroid: up to K in-radius points, lowest distance
// first, padded by repeating the closest qualifying point (or the centroid
// itself when the ball is empty). Coordinates are stored relative to the
// centroid; feature channels are copied unchanged.
struct GroupedPoints {
  std::vector<Vec3> centroids;              // N'
  std::size_t group_size = 0;               // K
  std::size_t feature_channels = 0;         // C
  std::vector<Vec3> relative;               // N' * K, row-major by centroid
  std::vector<double> features;             // N' * K * C
  std::vector<std::size_t> member_indices;  // N' * K; kNoMember for synthetic
                                            // centroid entries

  static constexpr std::size_t kNoMember = std::numeric_limits<std::size_t>::max();
};

// features holds C channels per point, row-major; pass an empty vector for
// C = 0.
GroupedPoints ball_query_group(const PointCloud& pc,
                               const std::vector<double>& features,
                               std::size_t feature_channels,
                               const std::vector<std::size_t>& centroid_indices,
                               double radius, std::size_t k);

// Centroids given by position; they need not be members of the cloud.
GroupedPoints ball_query_group_at(const PointCloud& pc,
                                  const std::vector<double>& features,
                                  std::size_t feature_channels,
                                  const std::vector<Vec3>& centroids,
                                  double radius, std::size_t k);

}  // namespace fusionloc
