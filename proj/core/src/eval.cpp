#include "fusionloc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "fusionloc/errors.hpp"
#include "fusionloc/rng.hpp"

namespace fusionloc {

namespace {

constexpr std::uint64_t kEvalCropTag = 0xe7a1u;

EvalReport summarize(std::vector<FrameErrors> frames) {
  if (frames.empty()) {
    throw DegenerateInputError("evaluate: no frames to evaluate");
  }
  EvalReport report;
  report.frames = std::move(frames);

  std::map<std::string, std::vector<std::pair<double, double>>> by_scene;
  std::vector<std::pair<double, double>> all;
  for (const auto& f : report.frames) {
    by_scene[f.scene].emplace_back(f.translation_m, f.rotation_deg);
    all.emplace_back(f.translation_m, f.rotation_deg);
  }
  double t_sum = 0.0, r_sum = 0.0;
  for (const auto& [scene, errs] : by_scene) {
    const auto [t_med, r_med] = median_errors(errs);
    report.scenes.push_back({scene, errs.size(), t_med, r_med});
    t_sum += t_med;
    r_sum += r_med;
  }
  const auto [t_all, r_all] = median_errors(all);
  report.overall_translation_m = t_all;
  report.overall_rotation_deg = r_all;
  report.average_translation_m = t_sum / static_cast<double>(by_scene.size());
  report.average_rotation_deg = r_sum / static_cast<double>(by_scene.size());
  return report;
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  nlohmann::json frames_json = nlohmann::json::array();
  for (const auto& f : frames) {
    frames_json.push_back({{"scene", f.scene},
                           {"index", f.index},
                           {"translation_m", f.translation_m},
                           {"rotation_deg", f.rotation_deg}});
  }
  j["frames"] = frames_json;
  nlohmann::json scenes_json = nlohmann::json::array();
  for (const auto& s : scenes) {
    scenes_json.push_back({{"scene", s.scene},
                           {"frames", s.frame_count},
                           {"median_translation_m", s.translation_m},
                           {"median_rotation_deg", s.rotation_deg}});
  }
  j["scenes"] = scenes_json;
  j["overall"] = {{"median_translation_m", overall_translation_m},
                  {"median_rotation_deg", overall_rotation_deg}};
  j["average"] = {{"median_translation_m", average_translation_m},
                  {"median_rotation_deg", average_rotation_deg}};
  return j;
}

std::string EvalReport::to_table() const {
  std::size_t width = 7;  // "Average"
  for (const auto& s : scenes) width = std::max(width, s.scene.size());

  std::ostringstream os;
  char buf[64];
  for (const auto& s : scenes) {
    std::snprintf(buf, sizeof(buf), "%-*s  %.2fm, %.2f°\n",
                  static_cast<int>(width), s.scene.c_str(), s.translation_m,
                  s.rotation_deg);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "%-*s  %.2fm, %.2f°\n",
                static_cast<int>(width), "Average", average_translation_m,
                average_rotation_deg);
  os << buf;
  return os.str();
}

EvalReport evaluate_predictions(const std::vector<TrainSample>& samples,
                                const std::vector<Pose>& predictions) {
  if (samples.size() != predictions.size()) {
    throw InvalidInputError("evaluate: one prediction per sample required");
  }
  std::vector<FrameErrors> frames;
  frames.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    frames.push_back({samples[i].scene, samples[i].index,
                      translation_error(predictions[i], samples[i].target_pose),
                      rotation_error(predictions[i], samples[i].target_pose)});
  }
  return summarize(std::move(frames));
}

std::vector<Pose> predict_poses(const PoseRegressor& model,
                                const std::vector<TrainSample>& samples,
                                std::uint64_t seed) {
  std::vector<Pose> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const FrameInput input =
        make_input(samples[i], model.config(), /*train_mode=*/false,
                   derive_seed(seed, kEvalCropTag, i));
    out.push_back(model.forward(input).decode());
  }
  return out;
}

EvalReport evaluate_model(const PoseRegressor& model,
                          const std::vector<TrainSample>& samples,
                          std::uint64_t seed) {
  return evaluate_predictions(samples, predict_poses(model, samples, seed));
}

Pose mean_pose(const std::vector<TrainSample>& samples) {
  if (samples.empty()) {
    throw DegenerateInputError("mean_pose: no samples");
  }
  Vec3 t{0, 0, 0};
  double qu = 0.0;
  Vec3 qv{0, 0, 0};
  for (const auto& s : samples) {
    t = t + s.target_pose.t;
    qu += s.target_pose.q.u();
    qv = qv + s.target_pose.q.v();
  }
  const double n = static_cast<double>(samples.size());
  t = t / n;
  const double norm = std::sqrt(qu * qu / (n * n) + qv.dot(qv) / (n * n));
  if (norm == 0.0) {
    return {t, UnitQuaternion::identity()};
  }
  return {t, UnitQuaternion(qu / n / norm, qv / n / norm)};
}

EvalReport evaluate_constant(const std::vector<TrainSample>& samples,
                             const Pose& constant) {
  std::vector<Pose> preds(samples.size(), constant);
  return evaluate_predictions(samples, preds);
}

}  // namespace fusionloc
