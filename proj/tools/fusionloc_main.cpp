// Command line front end: train, eval, convert, smear, synth.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fusionloc/checkpoint.hpp"
#include "fusionloc/data.hpp"
#include "fusionloc/errors.hpp"
#include "fusionloc/eval.hpp"
#include "fusionloc/geometry.hpp"
#include "fusionloc/models.hpp"
#include "fusionloc/ply.hpp"
#include "fusionloc/train.hpp"
#include "fusionloc/version.hpp"

namespace fs = std::filesystem;
using namespace fusionloc;

namespace {

struct CommonModelArgs {
  std::string config_path;
  std::string model = "fusionloc";
  std::string preset = "default";
  std::uint64_t seed = 0;
};

ModelConfig resolve_model_config(const CommonModelArgs& args) {
  if (!args.config_path.empty()) {
    ModelConfig c = load_model_config(args.config_path);
    return c;
  }
  const ModelKind kind = model_kind_from_string(args.model);
  return args.preset == "compact" ? compact_model_config(kind)
                                  : default_model_config(kind);
}

void write_manifest(const std::string& dir, const std::string& command,
                    const nlohmann::json& options) {
  nlohmann::json manifest = {{"command", command},
                             {"version", kVersion},
                             {"options", options}};
  fs::create_directories(dir);
  std::ofstream os(fs::path(dir) / "run_manifest.json");
  if (!os) throw IoError("cannot write run manifest under " + dir);
  os << manifest.dump(2) << "\n";
}

DepthMap load_depth_png(const std::string& path) {
  return depth_from_millimeters(load_png_u16(path));
}

// Jet-colored vertices make the exported clouds easy to inspect. Degenerate
// ranges (constant depth) export uncolored instead of failing.
std::vector<std::array<std::uint8_t, 3>> depth_colors(const DepthMap& depth) {
  std::vector<std::array<std::uint8_t, 3>> colors;
  try {
    const ImageU8 jet = jet_colormap(depth);
    for (std::size_t i = 0; i < depth.depth.size(); ++i) {
      if (!depth.valid[i]) continue;
      colors.push_back(
          {jet.data[i * 3], jet.data[i * 3 + 1], jet.data[i * 3 + 2]});
    }
  } catch (const DegenerateInputError&) {
    colors.clear();
  }
  return colors;
}

void write_ply_maybe_colored(
    const std::string& path, const PointCloud& cloud,
    const std::vector<std::array<std::uint8_t, 3>>& colors) {
  if (colors.size() == cloud.size()) {
    write_ply(path, cloud, colors);
  } else {
    write_ply(path, cloud);
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Pseudo-LiDAR camera pose regression toolkit"};
  app.require_subcommand(1);

  // ---- train ----------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "Train a pose regressor");
  CommonModelArgs train_margs;
  DataConfig train_data;
  TrainOptions topt;
  std::string train_out, resume;
  std::vector<std::string> train_scenes;
  train_cmd->add_option("--data-root", train_data.data_root,
                        "Dataset root in scene/sequence layout");
  train_cmd->add_flag("--synthetic", train_data.synthetic,
                      "Train on a generated synthetic scene");
  train_cmd->add_option("--synthetic-frames", train_data.synthetic_frames,
                        "Synthetic trajectory length")->capture_default_str();
  train_cmd->add_option("--scenes", train_scenes, "Restrict to these scenes");
  train_cmd->add_option("--rgb-features", train_data.feature_root,
                        "Directory of precomputed .feature.bin files used "
                        "instead of the trainable encoder");
  train_cmd->add_option("--config", train_margs.config_path,
                        "Model config TOML");
  train_cmd->add_option("--model", train_margs.model,
                        "fusionloc | pointnet-pose | depth-posenet")
      ->capture_default_str();
  train_cmd->add_option("--preset", train_margs.preset,
                        "default | compact")->capture_default_str();
  train_cmd->add_option("--seed", train_margs.seed, "Run seed")
      ->capture_default_str();
  train_cmd->add_option("--epochs", topt.max_epochs, "Maximum epochs")
      ->capture_default_str();
  train_cmd->add_option("--batch-size", topt.batch_size, "Minibatch size")
      ->capture_default_str();
  train_cmd->add_option("--lr", topt.lr, "Learning rate")->capture_default_str();
  train_cmd->add_option("--weight-decay", topt.weight_decay, "Weight decay")
      ->capture_default_str();
  bool no_stop = false;
  train_cmd->add_flag("--no-convergence-stop", no_stop,
                      "Always run the full epoch budget");
  train_cmd->add_option("--out", train_out, "Output directory")->required();
  train_cmd->add_option("--checkpoint", resume, "Resume from this checkpoint");

  // ---- eval -----------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  DataConfig eval_data;
  std::string eval_ckpt, eval_out, eval_config;
  std::uint64_t eval_seed = 0;
  std::vector<std::string> eval_scenes;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Trained checkpoint")
      ->required();
  eval_cmd->add_option("--data-root", eval_data.data_root, "Dataset root");
  eval_cmd->add_flag("--synthetic", eval_data.synthetic,
                     "Evaluate on the generated synthetic scene");
  eval_cmd->add_option("--synthetic-frames", eval_data.synthetic_frames,
                       "Synthetic trajectory length")->capture_default_str();
  eval_cmd->add_option("--scenes", eval_scenes, "Restrict to these scenes");
  eval_cmd->add_option("--rgb-features", eval_data.feature_root,
                       "Directory of precomputed .feature.bin files");
  eval_cmd->add_option("--config", eval_config,
                       "Model config TOML; must match the checkpoint");
  eval_cmd->add_option("--seed", eval_seed, "Run seed")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Report output directory");

  // ---- convert ---------------------------------------------------------------
  auto* convert_cmd =
      app.add_subcommand("convert", "Lift a depth PNG to an ASCII PLY cloud");
  std::string conv_depth, conv_out;
  CameraIntrinsics conv_k = default_intrinsics();
  convert_cmd->add_option("--depth", conv_depth, "16-bit depth PNG")->required();
  convert_cmd->add_option("--out", conv_out, "Output PLY path")->required();
  convert_cmd->add_option("--fu", conv_k.f_u, "Horizontal focal length")
      ->capture_default_str();
  convert_cmd->add_option("--fv", conv_k.f_v, "Vertical focal length")
      ->capture_default_str();
  convert_cmd->add_option("--cu", conv_k.c_u, "Principal point column")
      ->capture_default_str();
  convert_cmd->add_option("--cv", conv_k.c_v, "Principal point row")
      ->capture_default_str();

  // ---- smear -----------------------------------------------------------------
  auto* smear_cmd = app.add_subcommand(
      "smear", "Compare clouds lifted from a raw and a box-convolved depth map");
  std::string smear_depth, smear_out;
  int smear_kernel = 11;
  CameraIntrinsics smear_k = default_intrinsics();
  smear_cmd->add_option("--depth", smear_depth, "16-bit depth PNG")->required();
  smear_cmd->add_option("--kernel", smear_kernel, "Box kernel size (odd, >= 3)")
      ->capture_default_str();
  smear_cmd->add_option("--out", smear_out, "Output directory")->required();
  smear_cmd->add_option("--fu", smear_k.f_u, "Horizontal focal length")
      ->capture_default_str();
  smear_cmd->add_option("--fv", smear_k.f_v, "Vertical focal length")
      ->capture_default_str();
  smear_cmd->add_option("--cu", smear_k.c_u, "Principal point column")
      ->capture_default_str();
  smear_cmd->add_option("--cv", smear_k.c_v, "Principal point row")
      ->capture_default_str();

  // ---- synth -----------------------------------------------------------------
  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic scene on disk");
  std::uint64_t synth_seed = 42;
  std::size_t synth_frames = 60, synth_test_every = 6;
  std::string synth_out, synth_name = "synth";
  synth_cmd->add_option("--seed", synth_seed, "Scene seed")->capture_default_str();
  synth_cmd->add_option("--frames", synth_frames, "Trajectory length")
      ->capture_default_str();
  synth_cmd->add_option("--test-every", synth_test_every,
                        "Every n-th frame goes to the held-out sequence")
      ->capture_default_str();
  synth_cmd->add_option("--scene-name", synth_name, "Scene directory name")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "Output dataset root")->required();

  CLI11_PARSE(app, argc, argv);

  if (train_cmd->parsed()) {
    train_data.scenes = train_scenes;
    train_data.synthetic_seed = train_margs.seed;
    topt.data = train_data;
    topt.seed = train_margs.seed;
    topt.out_dir = train_out;
    topt.stop_on_convergence = !no_stop;
    topt.resume_checkpoint = resume;

    ad::AdamConfig adam;
    adam.lr = topt.lr;
    adam.weight_decay = topt.weight_decay;

    TrainState state = resume.empty()
                           ? TrainState(resolve_model_config(train_margs), adam)
                           : load_train_checkpoint(resume, adam);
    topt.model = state.model.config();

    write_manifest(train_out, "train",
                   {{"seed", topt.seed},
                    {"epochs", topt.max_epochs},
                    {"batch_size", topt.batch_size},
                    {"lr", topt.lr},
                    {"weight_decay", topt.weight_decay},
                    {"data_root", train_data.data_root},
                    {"synthetic", train_data.synthetic},
                    {"synthetic_frames", train_data.synthetic_frames},
                    {"resume", resume},
                    {"model_config", model_config_to_json(state.model.config())}});
    {
      std::ofstream os(fs::path(train_out) / "model_config.toml");
      os << model_config_to_toml(state.model.config());
    }

    const TrainResult result = train_model(topt, state, &std::cout);
    std::cout << "trained " << result.epochs_run << " epochs"
              << (result.converged ? " (converged)" : "") << ", checkpoint at "
              << result.checkpoint_path << "\n";
    return 0;
  }

  if (eval_cmd->parsed()) {
    eval_data.scenes = eval_scenes;
    eval_data.synthetic_seed = eval_seed;
    const ModelConfig config = checkpoint_model_config(eval_ckpt);
    if (!eval_config.empty()) {
      const ModelConfig given = load_model_config(eval_config);
      if (model_config_to_json(given) != model_config_to_json(config)) {
        throw InvalidInputError(
            "eval: --config does not match the checkpoint's model config");
      }
    }

    ad::AdamConfig adam;
    TrainState state = load_train_checkpoint(eval_ckpt, adam);
    eval_data.synthetic_seed = eval_seed;
    SampleSet samples = load_samples(eval_data, config, eval_seed);
    if (samples.test.empty()) {
      throw DegenerateInputError("eval: no test frames in the dataset");
    }
    const EvalReport report = evaluate_model(state.model, samples.test, eval_seed);
    std::cout << report.to_table();
    if (!eval_out.empty()) {
      write_manifest(eval_out, "eval",
                     {{"seed", eval_seed},
                      {"checkpoint", eval_ckpt},
                      {"data_root", eval_data.data_root},
                      {"synthetic", eval_data.synthetic},
                      {"model_config", model_config_to_json(config)}});
      std::ofstream js(fs::path(eval_out) / "report.json");
      js << report.to_json().dump(2) << "\n";
      std::ofstream tx(fs::path(eval_out) / "report.txt");
      tx << report.to_table();
      if (!js || !tx) throw IoError("cannot write report under " + eval_out);
    }
    return 0;
  }

  if (convert_cmd->parsed()) {
    const DepthMap depth = load_depth_png(conv_depth);
    conv_k.width = depth.width;
    conv_k.height = depth.height;
    const PointCloud cloud = depth_to_pointcloud(depth, conv_k);
    if (cloud.empty()) {
      throw DegenerateInputError("convert: depth map has no valid pixels");
    }
    write_ply_maybe_colored(conv_out, cloud, depth_colors(depth));
    nlohmann::json manifest = {{"command", "convert"},
                               {"version", kVersion},
                               {"options",
                                {{"depth", conv_depth},
                                 {"out", conv_out},
                                 {"fu", conv_k.f_u},
                                 {"fv", conv_k.f_v},
                                 {"cu", conv_k.c_u},
                                 {"cv", conv_k.c_v}}}};
    std::ofstream os(conv_out + ".manifest.json");
    os << manifest.dump(2) << "\n";
    std::cout << "wrote " << cloud.size() << " points to " << conv_out << "\n";
    return 0;
  }

  if (smear_cmd->parsed()) {
    const DepthMap depth = load_depth_png(smear_depth);
    smear_k.width = depth.width;
    smear_k.height = depth.height;
    const DepthMap convolved = convolve_depth(depth, smear_kernel);
    const PointCloud original = depth_to_pointcloud(depth, smear_k);
    if (original.empty()) {
      throw DegenerateInputError("smear: depth map has no valid pixels");
    }
    const PointCloud smeared = depth_to_pointcloud(convolved, smear_k);
    const SmearMetric metric = smear_metric(original, smeared);

    write_manifest(smear_out, "smear",
                   {{"depth", smear_depth},
                    {"kernel", smear_kernel},
                    {"fu", smear_k.f_u},
                    {"fv", smear_k.f_v},
                    {"cu", smear_k.c_u},
                    {"cv", smear_k.c_v}});
    const auto colors = depth_colors(depth);
    write_ply_maybe_colored((fs::path(smear_out) / "original.ply").string(),
                            original, colors);
    write_ply_maybe_colored((fs::path(smear_out) / "convolved.ply").string(),
                            smeared, colors);
    nlohmann::json metrics = {{"kernel", smear_kernel},
                              {"mean_displacement_m", metric.mean_displacement},
                              {"max_displacement_m", metric.max_displacement},
                              {"points", original.size()}};
    std::ofstream os(fs::path(smear_out) / "smear.json");
    os << metrics.dump(2) << "\n";
    if (!os) throw IoError("cannot write smear metrics under " + smear_out);
    std::cout << "mean displacement " << metric.mean_displacement
              << " m, max " << metric.max_displacement << " m\n";
    return 0;
  }

  if (synth_cmd->parsed()) {
    const SynthScene scene = synth_scene(synth_seed, synth_frames);
    write_manifest(synth_out, "synth",
                   {{"seed", synth_seed},
                    {"frames", synth_frames},
                    {"test_every", synth_test_every},
                    {"scene_name", synth_name}});
    write_scene_dataset(synth_out, synth_name, scene.frames, synth_test_every);
    std::cout << "wrote " << scene.frames.size() << " frames under " << synth_out
              << "/" << synth_name << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InvalidInputError& e) {
    std::cerr << "error: invalid-input: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateInputError& e) {
    std::cerr << "error: degenerate-input: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: numeric-failure: " << e.what() << "\n";
    return 4;
  } catch (const IngestionError& e) {
    std::cerr << "error: ingestion: " << e.what() << "\n";
    return 5;
  } catch (const IoError& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return 6;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}
