#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace symguide::store {

enum class Source { Teleoperation, PolicyRollout };

struct TrajectoryRecord {
  std::string id;
  int task_id = 0;  // 1..100
  std::string task_instruction;
  Source source = Source::Teleoperation;
  double duration_s = 0.0;
  double fps_native = 0.0;
  std::string head_video;                 // store-relative after ingest
  std::vector<std::string> wrist_videos;  // 0..2
  bool success = false;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

enum class FrameOrigin { UniformSample, Keyframe };

struct FrameRef {
  std::string trajectory_id;
  int frame_index = 0;  // index into the trajectory's native frame sequence
  double timestamp_s = 0.0;
  FrameOrigin origin = FrameOrigin::UniformSample;

  friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

enum class PlanProvenance { ModelDecomposed, ManuallyEdited };

struct SubtaskPlan {
  std::string trajectory_id;
  std::vector<std::string> subtasks;
  PlanProvenance provenance = PlanProvenance::ModelDecomposed;

  friend bool operator==(const SubtaskPlan&, const SubtaskPlan&) = default;
};

std::string_view to_token(Source source);
std::string_view to_token(FrameOrigin origin);
std::string_view to_token(PlanProvenance provenance);

// Throws InvalidArgument listing the first broken invariant.
void check_record(const TrajectoryRecord& record);

void to_json(nlohmann::json& j, const TrajectoryRecord& r);
void from_json(const nlohmann::json& j, TrajectoryRecord& r);
void to_json(nlohmann::json& j, const FrameRef& f);
void from_json(const nlohmann::json& j, FrameRef& f);
void to_json(nlohmann::json& j, const SubtaskPlan& p);
void from_json(const nlohmann::json& j, SubtaskPlan& p);

}  // namespace symguide::store
