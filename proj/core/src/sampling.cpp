#include "fusionloc/sampling.hpp"

#include <algorithm>
#include <numeric>

#include "fusionloc/errors.hpp"
#include "fusionloc/rng.hpp"

namespace fusionloc {

PointCloud random_sample(const PointCloud& pc, std::size_t n, std::uint64_t seed) {
  if (pc.empty()) {
    throw DegenerateInputError("random_sample: empty point cloud");
  }
  Rng rng(seed);
  PointCloud out;
  out.points.reserve(n);
  if (n <= pc.size()) {
    // Partial Fisher-Yates over an index array.
    std::vector<std::size_t> idx(pc.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + rng.uniform_below(pc.size() - i);
      std::swap(idx[i], idx[j]);
      out.points.push_back(pc.points[idx[i]]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out.points.push_back(pc.points[rng.uniform_below(pc.size())]);
    }
  }
  return out;
}

std::vector<std::size_t> farthest_point_sample_from(const PointCloud& pc,
                                                    std::size_t n,
                                                    std::size_t first) {
  if (n < 1 || n > pc.size()) {
    throw InvalidInputError("farthest_point_sample: need 1 <= n <= cloud size");
  }
  if (first >= pc.size()) {
    throw InvalidInputError("farthest_point_sample: first index out of range");
  }
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  chosen.push_back(first);

  std::vector<double> min_dist(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    min_dist[i] = distance(pc.points[i], pc.points[first]);
  }
  while (chosen.size() < n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pc.size(); ++i) {
      if (min_dist[i] > min_dist[best]) best = i;  // ties keep the lowest index
    }
    chosen.push_back(best);
    for (std::size_t i = 0; i < pc.size(); ++i) {
      min_dist[i] = std::min(min_dist[i], distance(pc.points[i], pc.points[best]));
    }
  }
  return chosen;
}

std::vector<std::size_t> farthest_point_sample(const PointCloud& pc,
                                               std::size_t n,
                                               std::uint64_t seed) {
  if (n < 1 || n > pc.size()) {
    throw InvalidInputError("farthest_point_sample: need 1 <= n <= cloud size");
  }
  Rng rng(seed);
  return farthest_point_sample_from(pc, n, rng.uniform_below(pc.size()));
}

GroupedPoints ball_query_group_at(const PointCloud& pc,
                                  const std::vector<double>& features,
                                  std::size_t feature_channels,
                                  const std::vector<Vec3>& centroids,
                                  double radius, std::size_t k) {
  if (!(radius > 0.0) || k < 1) {
    throw InvalidInputError("ball_query_group: radius must be > 0 and K >= 1");
  }
  if (feature_channels > 0 && features.size() != pc.size() * feature_channels) {
    throw InvalidInputError("ball_query_group: feature array size mismatch");
  }

  GroupedPoints out;
  out.centroids = centroids;
  out.group_size = k;
  out.feature_channels = feature_channels;
  out.relative.resize(centroids.size() * k);
  out.member_indices.resize(centroids.size() * k);
  out.features.assign(centroids.size() * k * feature_channels, 0.0);

  std::vector<std::pair<double, std::size_t>> in_ball;
  for (std::size_t ci = 0; ci < centroids.size(); ++ci) {
    const Vec3& c = centroids[ci];
    in_ball.clear();
    for (std::size_t i = 0; i < pc.size(); ++i) {
      const double d = distance(pc.points[i], c);
      if (d <= radius) in_ball.emplace_back(d, i);
    }
    // Lowest distance first, ties by index.
    std::sort(in_ball.begin(), in_ball.end());

    for (std::size_t slot = 0; slot < k; ++slot) {
      const std::size_t at = ci * k + slot;
      if (in_ball.empty()) {
        // Empty ball: K copies of the centroid itself.
        out.relative[at] = {0.0, 0.0, 0.0};
        out.member_indices[at] = GroupedPoints::kNoMember;
        continue;
      }
      // Slots past the qualifying count repeat the closest qualifying point.
      const std::size_t src = in_ball[slot < in_ball.size() ? slot : 0].second;
      out.relative[at] = pc.points[src] - c;
      out.member_indices[at] = src;
      for (std::size_t f = 0; f < feature_channels; ++f) {
        out.features[at * feature_channels + f] =
            features[src * feature_channels + f];
      }
    }
  }
  return out;
}

GroupedPoints ball_query_group(const PointCloud& pc,
                               const std::vector<double>& features,
                               std::size_t feature_channels,
                               const std::vector<std::size_t>& centroid_indices,
                               double radius, std::size_t k) {
  std::vector<Vec3> centroids;
  centroids.reserve(centroid_indices.size());
  for (std::size_t i : centroid_indices) {
    if (i >= pc.size()) {
      throw InvalidInputError("ball_query_group: centroid index out of range");
    }
    centroids.push_back(pc.points[i]);
  }
  return ball_query_group_at(pc, features, feature_channels, centroids, radius, k);
}

}  // namespace fusionloc
