#include "fusionloc/ply.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fusionloc/errors.hpp"

namespace fusionloc {

namespace {

void write_header(std::ostream& os, std::size_t count, bool with_color) {
  os << "ply\nformat ascii 1.0\n";
  os << "element vertex " << count << "\n";
  os << "property float x\nproperty float y\nproperty float z\n";
  if (with_color) {
    os << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  os << "end_header\n";
}

void write_body(std::ostream& os, const PointCloud& cloud,
                const std::vector<std::array<std::uint8_t, 3>>* colors) {
  char line[160];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    if (colors) {
      const auto& c = (*colors)[i];
      std::snprintf(line, sizeof(line), "%.6f %.6f %.6f %d %d %d\n", p.x, p.y,
                    p.z, c[0], c[1], c[2]);
    } else {
      std::snprintf(line, sizeof(line), "%.6f %.6f %.6f\n", p.x, p.y, p.z);
    }
    os << line;
  }
}

}  // namespace

void write_ply(const std::string& path, const PointCloud& cloud) {
  std::ofstream os(path);
  if (!os) throw IoError("write_ply: cannot open " + path);
  write_header(os, cloud.size(), false);
  write_body(os, cloud, nullptr);
  if (!os) throw IoError("write_ply: failed writing " + path);
}

void write_ply(const std::string& path, const PointCloud& cloud,
               const std::vector<std::array<std::uint8_t, 3>>& colors) {
  if (colors.size() != cloud.size()) {
    throw InvalidInputError("write_ply: one color per point required");
  }
  std::ofstream os(path);
  if (!os) throw IoError("write_ply: cannot open " + path);
  write_header(os, cloud.size(), true);
  write_body(os, cloud, &colors);
  if (!os) throw IoError("write_ply: failed writing " + path);
}

PlyContents read_ply(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("read_ply: cannot open " + path);

  std::string line;
  if (!std::getline(is, line) || line != "ply") {
    throw IngestionError("read_ply: " + path + " is not a PLY file");
  }
  std::size_t count = 0;
  std::vector<std::string> properties;
  bool in_header = true;
  while (in_header && std::getline(is, line)) {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "ascii") {
        throw IngestionError("read_ply: only ASCII PLY supported: " + path);
      }
    } else if (word == "element") {
      std::string name;
      ss >> name >> count;
      if (name != "vertex") {
        throw IngestionError("read_ply: unsupported element in " + path);
      }
    } else if (word == "property") {
      std::string type, name;
      ss >> type >> name;
      properties.push_back(name);
    } else if (word == "end_header") {
      in_header = false;
    }
  }
  if (in_header) throw IngestionError("read_ply: truncated header in " + path);

  const bool with_color = properties.size() >= 6;
  if (properties.size() < 3 || properties[0] != "x" || properties[1] != "y" ||
      properties[2] != "z") {
    throw IngestionError("read_ply: expected x y z properties in " + path);
  }

  PlyContents out;
  out.cloud.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line)) {
      throw IngestionError("read_ply: truncated body in " + path);
    }
    std::istringstream ss(line);
    Vec3 p;
    ss >> p.x >> p.y >> p.z;
    if (!ss) throw IngestionError("read_ply: bad vertex line in " + path);
    out.cloud.points.push_back(p);
    if (with_color) {
      int r, g, b;
      ss >> r >> g >> b;
      if (!ss) throw IngestionError("read_ply: bad color in " + path);
      out.colors.push_back({static_cast<std::uint8_t>(r),
                            static_cast<std::uint8_t>(g),
                            static_cast<std::uint8_t>(b)});
    }
  }
  return out;
}

}  // namespace fusionloc
