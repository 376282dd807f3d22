#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fusionloc/geometry.hpp"

namespace fusionloc {

// ASCII PLY export with properties x y z and optional red green blue.
// Colors, when given, must hold one RGB triple per point.
void write_ply(const std::string& path, const PointCloud& cloud);
void write_ply(const std::string& path, const PointCloud& cloud,
               const std::vector<std::array<std::uint8_t, 3>>& colors);

struct PlyContents {
  PointCloud cloud;
  std::vector<std::array<std::uint8_t, 3>> colors;  // empty when uncolored
};

PlyContents read_ply(const std::string& path);

}  // namespace fusionloc
