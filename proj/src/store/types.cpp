#include "symguide/store/types.hpp"

#include <cmath>

#include "symguide/common/errors.hpp"

namespace symguide::store {

std::string_view to_token(Source source) {
  return source == Source::Teleoperation ? "teleoperation" : "policy_rollout";
}

std::string_view to_token(FrameOrigin origin) {
  return origin == FrameOrigin::UniformSample ? "uniform" : "keyframe";
}

std::string_view to_token(PlanProvenance provenance) {
  return provenance == PlanProvenance::ModelDecomposed ? "model_decomposed" : "manually_edited";
}

namespace {

Source source_from(const std::string& s) {
  if (s == "teleoperation") return Source::Teleoperation;
  if (s == "policy_rollout") return Source::PolicyRollout;
  throw InvalidArgument("unknown trajectory source '" + s + "'");
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
      return false;
    }
  }
  return true;
}

}  // namespace

void check_record(const TrajectoryRecord& r) {
  if (!valid_id(r.id)) throw InvalidArgument("trajectory id '" + r.id + "' is not a safe name");
  if (r.task_id < 1 || r.task_id > 100) {
    throw InvalidArgument("task_id " + std::to_string(r.task_id) + " outside 1..100");
  }
  if (!(r.duration_s > 0.0) || !std::isfinite(r.duration_s)) {
    throw InvalidArgument("duration_s must be positive");
  }
  if (!(r.fps_native > 0.0) || !std::isfinite(r.fps_native)) {
    throw InvalidArgument("fps_native must be positive");
  }
  if (r.wrist_videos.size() > 2) throw InvalidArgument("at most 2 wrist videos");
}

void to_json(nlohmann::json& j, const TrajectoryRecord& r) {
  j = {{"id", r.id},
       {"task_id", r.task_id},
       {"task_instruction", r.task_instruction},
       {"source", to_token(r.source)},
       {"duration_s", r.duration_s},
       {"fps_native", r.fps_native},
       {"head_video", r.head_video},
       {"wrist_videos", r.wrist_videos},
       {"success", r.success}};
}

void from_json(const nlohmann::json& j, TrajectoryRecord& r) {
  r.id = j.at("id").get<std::string>();
  r.task_id = j.at("task_id").get<int>();
  r.task_instruction = j.value("task_instruction", "");
  r.source = source_from(j.at("source").get<std::string>());
  r.duration_s = j.at("duration_s").get<double>();
  r.fps_native = j.at("fps_native").get<double>();
  r.head_video = j.value("head_video", "");
  r.wrist_videos = j.value("wrist_videos", std::vector<std::string>{});
  r.success = j.at("success").get<bool>();
}

void to_json(nlohmann::json& j, const FrameRef& f) {
  j = {{"trajectory_id", f.trajectory_id},
       {"frame_index", f.frame_index},
       {"timestamp_s", f.timestamp_s},
       {"origin", to_token(f.origin)}};
}

void from_json(const nlohmann::json& j, FrameRef& f) {
  f.trajectory_id = j.at("trajectory_id").get<std::string>();
  f.frame_index = j.at("frame_index").get<int>();
  f.timestamp_s = j.at("timestamp_s").get<double>();
  const auto origin = j.value("origin", "uniform");
  if (origin != "uniform" && origin != "keyframe") {
    throw InvalidArgument("unknown frame origin '" + origin + "'");
  }
  f.origin = origin == "keyframe" ? FrameOrigin::Keyframe : FrameOrigin::UniformSample;
}

void to_json(nlohmann::json& j, const SubtaskPlan& p) {
  j = {{"trajectory_id", p.trajectory_id},
       {"subtasks", p.subtasks},
       {"provenance", to_token(p.provenance)}};
}

void from_json(const nlohmann::json& j, SubtaskPlan& p) {
  p.trajectory_id = j.value("trajectory_id", "");
  p.subtasks = j.at("subtasks").get<std::vector<std::string>>();
  p.provenance = j.value("provenance", "model_decomposed") == "manually_edited"
                     ? PlanProvenance::ManuallyEdited
                     : PlanProvenance::ModelDecomposed;
}

}  // namespace symguide::store
