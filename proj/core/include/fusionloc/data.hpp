#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fusionloc/autodiff.hpp"
#include "fusionloc/geometry.hpp"
#include "fusionloc/image.hpp"
#include "fusionloc/pose.hpp"

namespace fusionloc {

// Community-standard calibration for the Kinect v1 capture rig; the dataset
// itself ships no intrinsics. Overridable everywhere it is consumed.
CameraIntrinsics default_intrinsics();

// Depth PNGs store millimeters; 0 and 65535 are sensor no-reading codes.
constexpr std::uint16_t kDepthInvalidNear = 0;
constexpr std::uint16_t kDepthInvalidFar = 65535;

struct Frame {
  ImageU8 rgb;     // 640x480, 3 channels
  DepthMap depth;  // meters, native resolution
  Pose pose;       // camera-to-world
  std::string scene;
  std::string sequence;
  int index = 0;
};

// Loads one frame: color PNG, 16-bit depth PNG (millimeters -> meters, 0 and
// 65535 marked invalid) and a pose file of 16 whitespace-separated reals
// (row-major 4x4, camera-to-world). Failures raise IngestionError naming the
// offending file.
Frame load_frame(const std::string& rgb_path, const std::string& depth_path,
                 const std::string& pose_path, const CameraIntrinsics& k);

// Writes a frame in the dataset's on-disk convention (depth rounded to
// millimeters, invalid pixels stored as 65535).
void write_frame(const std::string& seq_dir, int index, const Frame& frame);

DepthMap depth_from_millimeters(const ImageU16& raw);
ImageU16 depth_to_millimeters(const DepthMap& depth);

// 640x480 -> bilinear resize so the short side is 256 (341x256) -> 224x224
// crop (seeded random in train mode, centered otherwise) -> [0,1] scaling ->
// per-channel normalization. Returns a {3,224,224} tensor.
ad::Tensor preprocess_image(const ImageU8& rgb, bool train_mode,
                            std::uint64_t seed);

// Resize step exposed for verification: short side to 256, aspect preserved
// (floor on the long side).
ImageU8 resize_short_side_256(const ImageU8& rgb);

// Lift then subsample: depth_to_pointcloud followed by random_sample.
PointCloud frame_to_pointset(const Frame& frame, const CameraIntrinsics& k,
                             std::size_t n, std::uint64_t seed);

// Precomputed visual features (drop-in replacement for the trainable
// encoder): one binary file per frame holding little-endian 64-bit floats.
void save_feature_file(const std::string& path, const std::vector<double>& v);
std::vector<double> load_feature_file(const std::string& path);

// ---- synthetic scenes -------------------------------------------------------

struct AxisBox {
  Vec3 lo, hi;
};

// Procedural room: a floor plane (y = 0, +y pointing down in world space)
// plus a few axis-aligned boxes resting on it.
struct SceneModel {
  std::vector<AxisBox> boxes;
  double max_range = 8.0;  // rays longer than this are invalid (sensor cap)
};

struct SynthScene {
  SceneModel model;
  std::vector<Frame> frames;
};

// Ray-casts n_frames 640x480 depth maps from a seeded smooth camera
// trajectory around the boxes; poses are exact by construction and RGB is a
// depth-shaded gradient. Deterministic per seed.
SynthScene synth_scene(std::uint64_t seed, std::size_t n_frames);

// Distance from a world point to the nearest scene surface (floor or box
// boundary); the ray-cast consistency oracle.
double surface_distance(const SceneModel& model, const Vec3& world_point);

// ---- dataset directory layout ------------------------------------------------

// scene/seq-NN/frame-XXXXXX.{color.png,depth.png,pose.txt} with
// TrainSplit.txt / TestSplit.txt listing "sequenceN" entries.
struct FrameFiles {
  std::string color, depth, pose;
  std::string scene, sequence;
  int index = 0;
};

struct SceneSplit {
  std::vector<FrameFiles> train;
  std::vector<FrameFiles> test;
};

// Writes frames as one scene; every test_every-th frame (offset mid-cycle)
// goes to the held-out sequence. test_every == 0 puts everything in train.
void write_scene_dataset(const std::string& out_dir, const std::string& scene_name,
                         const std::vector<Frame>& frames, std::size_t test_every);

// Scans data_root for scene directories with split files.
std::map<std::string, SceneSplit> index_dataset(const std::string& data_root);

Frame load_frame_files(const FrameFiles& files, const CameraIntrinsics& k);

}  // namespace fusionloc
