// Regenerates the golden ingestion fixtures under tests/golden/:
//   make_golden <golden-dir>
// The miniature scene is written in the standard dataset layout and the
// expectations are computed by reloading the written files, so the test
// pins exactly what ingestion must reproduce.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "fusionloc/data.hpp"

namespace fs = std::filesystem;
using namespace fusionloc;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_golden <golden-dir>\n");
    return 1;
  }
  const fs::path golden(argv[1]);
  const SynthScene scene = synth_scene(/*seed=*/20240831, /*n_frames=*/3);
  write_scene_dataset(golden.string(), "mini_scene", scene.frames,
                      /*test_every=*/0);

  const CameraIntrinsics k = default_intrinsics();
  const int probe_xy[5][2] = {{320, 240}, {17, 23}, {600, 450}, {100, 400},
                              {639, 0}};

  nlohmann::json expected;
  expected["frames"] = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "frame-%06d", i);
    const std::string base =
        (golden / "mini_scene" / "seq-01" / stem).string();
    const Frame frame =
        load_frame(base + ".color.png", base + ".depth.png",
                   base + ".pose.txt", k);

    nlohmann::json jf;
    jf["stem"] = stem;
    nlohmann::json probes = nlohmann::json::array();
    const ImageU16 mm = depth_to_millimeters(frame.depth);
    for (const auto& [x, y] : probe_xy) {
      probes.push_back({{"x", x}, {"y", y}, {"mm", mm.at(x, y)}});
    }
    jf["depth_probes"] = probes;
    jf["valid_count"] = static_cast<int>(
        std::count(frame.depth.valid.begin(), frame.depth.valid.end(), 1));
    jf["t"] = {frame.pose.t.x, frame.pose.t.y, frame.pose.t.z};
    jf["q"] = {frame.pose.q.u(), frame.pose.q.v().x, frame.pose.q.v().y,
               frame.pose.q.v().z};
    expected["frames"].push_back(jf);
  }

  std::ofstream os(golden / "expected.json");
  os << expected.dump(2) << "\n";
  std::printf("golden fixtures written under %s\n", golden.c_str());
  return 0;
}
