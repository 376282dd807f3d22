#include "fusionloc/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fusionloc/errors.hpp"
#include "fusionloc/rng.hpp"
#include "fusionloc/sampling.hpp"

namespace fs = std::filesystem;

namespace fusionloc {

CameraIntrinsics default_intrinsics() {
  return CameraIntrinsics{585.0, 585.0, 320.0, 240.0, 640, 480};
}

DepthMap depth_from_millimeters(const ImageU16& raw) {
  DepthMap d;
  d.width = raw.width;
  d.height = raw.height;
  d.depth.resize(raw.data.size());
  d.valid.resize(raw.data.size());
  for (std::size_t i = 0; i < raw.data.size(); ++i) {
    const std::uint16_t mm = raw.data[i];
    const bool ok = mm != kDepthInvalidNear && mm != kDepthInvalidFar;
    d.valid[i] = ok ? 1 : 0;
    d.depth[i] = ok ? mm / 1000.0 : 0.0;
  }
  return d;
}

ImageU16 depth_to_millimeters(const DepthMap& depth) {
  ImageU16 raw;
  raw.width = depth.width;
  raw.height = depth.height;
  raw.data.resize(depth.depth.size());
  for (std::size_t i = 0; i < depth.depth.size(); ++i) {
    if (!depth.valid[i]) {
      raw.data[i] = kDepthInvalidFar;
      continue;
    }
    const double mm = std::round(depth.depth[i] * 1000.0);
    if (mm <= 0.0 || mm >= kDepthInvalidFar) {
      raw.data[i] = kDepthInvalidFar;
    } else {
      raw.data[i] = static_cast<std::uint16_t>(mm);
    }
  }
  return raw;
}

namespace {

Pose read_pose_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IngestionError("cannot open pose file " + path);
  double m[16];
  for (int i = 0; i < 16; ++i) {
    if (!(is >> m[i])) {
      throw IngestionError("pose file " + path +
                           " does not contain 16 numbers");
    }
  }
  Mat3 r = {{{m[0], m[1], m[2]}, {m[4], m[5], m[6]}, {m[8], m[9], m[10]}}};
  Pose pose;
  pose.t = {m[3], m[7], m[11]};
  try {
    pose.q = rotmat_to_quat(r);
  } catch (const InvalidInputError& e) {
    throw IngestionError("pose file " + path + ": " + e.what());
  }
  return pose;
}

void write_pose_file(const std::string& path, const Pose& pose) {
  const Mat3 r = quat_to_rotmat(pose.q);
  const double m[16] = {r[0][0], r[0][1], r[0][2], pose.t.x,
                        r[1][0], r[1][1], r[1][2], pose.t.y,
                        r[2][0], r[2][1], r[2][2], pose.t.z,
                        0.0,     0.0,     0.0,     1.0};
  std::ofstream os(path);
  if (!os) throw IoError("cannot write pose file " + path);
  char buf[32];
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) {
      std::snprintf(buf, sizeof(buf), "%.17g", m[row * 4 + col]);
      os << buf << (col == 3 ? "\n" : "\t");
    }
  }
  if (!os) throw IoError("failed writing pose file " + path);
}

std::string frame_stem(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame-%06d", index);
  return buf;
}

}  // namespace

Frame load_frame(const std::string& rgb_path, const std::string& depth_path,
                 const std::string& pose_path, const CameraIntrinsics& k) {
  Frame frame;
  frame.rgb = load_png_u8(rgb_path);
  if (frame.rgb.channels != 3) {
    throw IngestionError("color image " + rgb_path + " is not 3-channel");
  }
  const ImageU16 raw = load_png_u16(depth_path);
  frame.depth = depth_from_millimeters(raw);
  if (frame.depth.width != k.width || frame.depth.height != k.height) {
    throw IngestionError("depth image " + depth_path +
                         " does not match the camera intrinsics");
  }
  if (frame.rgb.width != frame.depth.width ||
      frame.rgb.height != frame.depth.height) {
    throw IngestionError("color/depth resolution mismatch: " + rgb_path);
  }
  frame.pose = read_pose_file(pose_path);
  return frame;
}

void write_frame(const std::string& seq_dir, int index, const Frame& frame) {
  fs::create_directories(seq_dir);
  const std::string stem = seq_dir + "/" + frame_stem(index);
  save_png(stem + ".color.png", frame.rgb);
  save_png(stem + ".depth.png", depth_to_millimeters(frame.depth));
  write_pose_file(stem + ".pose.txt", frame.pose);
}

ImageU8 resize_short_side_256(const ImageU8& rgb) {
  if (rgb.width < rgb.height) {
    const int h = rgb.height * 256 / rgb.width;
    return resize_bilinear(rgb, 256, h);
  }
  const int w = rgb.width * 256 / rgb.height;
  return resize_bilinear(rgb, w, 256);
}

ad::Tensor preprocess_image(const ImageU8& rgb, bool train_mode,
                            std::uint64_t seed) {
  if (rgb.width != 640 || rgb.height != 480 || rgb.channels != 3) {
    throw InvalidInputError("preprocess_image: expected a 640x480 RGB image");
  }
  const ImageU8 resized = resize_short_side_256(rgb);  // 341x256

  constexpr int kCrop = 224;
  int x0, y0;
  if (train_mode) {
    Rng rng(seed);
    x0 = static_cast<int>(rng.uniform_below(resized.width - kCrop + 1));
    y0 = static_cast<int>(rng.uniform_below(resized.height - kCrop + 1));
  } else {
    x0 = (resized.width - kCrop) / 2;
    y0 = (resized.height - kCrop) / 2;
  }
  const ImageU8 patch = crop(resized, x0, y0, kCrop, kCrop);

  // Standard ImageNet channel statistics; kept for both scratch training and
  // precomputed-feature mode so the two see identical inputs.
  constexpr double kMean[3] = {0.485, 0.456, 0.406};
  constexpr double kStd[3] = {0.229, 0.224, 0.225};
  std::vector<double> chw(3 * kCrop * kCrop);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < kCrop; ++y) {
      for (int x = 0; x < kCrop; ++x) {
        const double v = patch.at(x, y, c) / 255.0;
        chw[(static_cast<std::size_t>(c) * kCrop + y) * kCrop + x] =
            (v - kMean[c]) / kStd[c];
      }
    }
  }
  return ad::Tensor::constant(
      {3, static_cast<std::size_t>(kCrop), static_cast<std::size_t>(kCrop)},
      std::move(chw));
}

PointCloud frame_to_pointset(const Frame& frame, const CameraIntrinsics& k,
                             std::size_t n, std::uint64_t seed) {
  const PointCloud lifted = depth_to_pointcloud(frame.depth, k);
  if (lifted.empty()) {
    throw DegenerateInputError("frame_to_pointset: no valid depth to lift");
  }
  return random_sample(lifted, n, seed);
}

namespace {

constexpr char kFeatureMagic[8] = {'F', 'L', 'F', 'E', 'A', 'T', '0', '1'};

}  // namespace

void save_feature_file(const std::string& path, const std::vector<double>& v) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write feature file " + path);
  os.write(kFeatureMagic, sizeof(kFeatureMagic));
  const std::uint64_t count = v.size();
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!os) throw IoError("failed writing feature file " + path);
}

std::vector<double> load_feature_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IngestionError("cannot open feature file " + path);
  char magic[8];
  if (!is.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kFeatureMagic, sizeof(magic)) != 0) {
    throw IngestionError("bad feature file magic in " + path);
  }
  std::uint64_t count = 0;
  if (!is.read(reinterpret_cast<char*>(&count), sizeof(count))) {
    throw IngestionError("truncated feature file " + path);
  }
  std::vector<double> v(count);
  if (!is.read(reinterpret_cast<char*>(v.data()),
               static_cast<std::streamsize>(count * sizeof(double)))) {
    throw IngestionError("truncated feature file " + path);
  }
  return v;
}

void write_scene_dataset(const std::string& out_dir, const std::string& scene_name,
                         const std::vector<Frame>& frames,
                         std::size_t test_every) {
  const fs::path scene_dir = fs::path(out_dir) / scene_name;
  fs::create_directories(scene_dir);

  const std::string train_dir = (scene_dir / "seq-01").string();
  const std::string test_dir = (scene_dir / "seq-02").string();
  int train_idx = 0, test_idx = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const bool is_test =
        test_every > 0 && (i % test_every) == test_every / 2;
    if (is_test) {
      write_frame(test_dir, test_idx++, frames[i]);
    } else {
      write_frame(train_dir, train_idx++, frames[i]);
    }
  }

  std::ofstream train_split(scene_dir / "TrainSplit.txt");
  train_split << "sequence1\n";
  std::ofstream test_split(scene_dir / "TestSplit.txt");
  if (test_idx > 0) test_split << "sequence2\n";
  if (!train_split || !test_split) {
    throw IoError("cannot write split files under " + scene_dir.string());
  }
}

namespace {

std::vector<std::string> read_split_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IngestionError("cannot open split file " + path.string());
  std::vector<std::string> sequences;
  std::string line;
  while (std::getline(is, line)) {
    // Lines read "sequenceN" (dataset convention) or "seq-NN".
    std::string t;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    }
    if (t.empty()) continue;
    int n = -1;
    if (t.rfind("sequence", 0) == 0) {
      n = std::atoi(t.c_str() + 8);
    } else if (t.rfind("seq-", 0) == 0) {
      n = std::atoi(t.c_str() + 4);
    }
    if (n < 0) {
      throw IngestionError("split file " + path.string() +
                           ": cannot parse line '" + line + "'");
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "seq-%02d", n);
    sequences.push_back(buf);
  }
  return sequences;
}

std::vector<FrameFiles> collect_sequence(const fs::path& scene_dir,
                                         const std::string& scene_name,
                                         const std::string& seq_name) {
  const fs::path seq_dir = scene_dir / seq_name;
  if (!fs::is_directory(seq_dir)) {
    throw IngestionError("missing sequence directory " + seq_dir.string());
  }
  std::vector<FrameFiles> out;
  for (int index = 0;; ++index) {
    const std::string stem = (seq_dir / frame_stem(index)).string();
    FrameFiles f;
    f.color = stem + ".color.png";
    f.depth = stem + ".depth.png";
    f.pose = stem + ".pose.txt";
    f.scene = scene_name;
    f.sequence = seq_name;
    f.index = index;
    if (!fs::exists(f.color)) break;
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

std::map<std::string, SceneSplit> index_dataset(const std::string& data_root) {
  if (!fs::is_directory(data_root)) {
    throw IngestionError("data root " + data_root + " is not a directory");
  }
  std::map<std::string, SceneSplit> scenes;
  for (const auto& entry : fs::directory_iterator(data_root)) {
    if (!entry.is_directory()) continue;
    const fs::path scene_dir = entry.path();
    if (!fs::exists(scene_dir / "TrainSplit.txt")) continue;
    const std::string scene_name = scene_dir.filename().string();
    SceneSplit split;
    for (const auto& seq : read_split_file(scene_dir / "TrainSplit.txt")) {
      auto frames = collect_sequence(scene_dir, scene_name, seq);
      split.train.insert(split.train.end(), frames.begin(), frames.end());
    }
    if (fs::exists(scene_dir / "TestSplit.txt")) {
      for (const auto& seq : read_split_file(scene_dir / "TestSplit.txt")) {
        auto frames = collect_sequence(scene_dir, scene_name, seq);
        split.test.insert(split.test.end(), frames.begin(), frames.end());
      }
    }
    scenes.emplace(scene_name, std::move(split));
  }
  if (scenes.empty()) {
    throw IngestionError("no scenes with split files under " + data_root);
  }
  return scenes;
}

Frame load_frame_files(const FrameFiles& files, const CameraIntrinsics& k) {
  Frame frame = load_frame(files.color, files.depth, files.pose, k);
  frame.scene = files.scene;
  frame.sequence = files.sequence;
  frame.index = files.index;
  return frame;
}

}  // namespace fusionloc
