#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "symguide/annotation/commands.hpp"
#include "symguide/store/types.hpp"
#include "symguide/symbols/types.hpp"

namespace symguide::annotation {

inline constexpr int kAnnotationSchemaVersion = 1;

enum class FailureType { TaskPlanning, Gripper6dPose, GripperState, HumanIntervention };

inline constexpr FailureType kAllFailureTypes[] = {
    FailureType::TaskPlanning, FailureType::Gripper6dPose, FailureType::GripperState,
    FailureType::HumanIntervention};

std::string_view to_token(FailureType type);         // "gripper_6d_pose"
std::string_view display_name(FailureType type);     // "Gripper 6D pose"
std::optional<FailureType> failure_type_from_token(std::string_view token);

struct FailureDiagnosis {
  bool success = false;
  std::optional<store::FrameRef> failure_keyframe;
  std::optional<int> failure_subtask_index;
  std::optional<FailureType> failure_type;
  std::optional<std::string> failure_reason;

  friend bool operator==(const FailureDiagnosis&, const FailureDiagnosis&) = default;
};

struct CorrectiveGuidance {
  std::vector<LowLevelCommand> low_level_avoidance;
  std::vector<LowLevelCommand> low_level_correction;
  std::optional<symbols::SymbolSet> avoidance_symbols;
  std::optional<symbols::SymbolSet> correction_symbols;
  std::optional<std::string> high_level_avoidance;
  std::optional<std::string> high_level_correction;

  bool empty() const {
    return low_level_avoidance.empty() && low_level_correction.empty() && !avoidance_symbols &&
           !correction_symbols && !high_level_avoidance && !high_level_correction;
  }
  friend bool operator==(const CorrectiveGuidance&, const CorrectiveGuidance&) = default;
};

enum class Stage { Stage1Done, Stage2Done, Stage3Draft, Finalized };

std::string_view to_token(Stage stage);
std::optional<Stage> stage_from_token(std::string_view token);

struct AnnotationRecord {
  std::string trajectory_id;
  store::SubtaskPlan subtask_plan;
  FailureDiagnosis diagnosis;
  CorrectiveGuidance guidance;
  Stage stage = Stage::Stage1Done;
  std::string annotator_id;
  std::string created_at;
  std::string updated_at;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

// Symbol sets are stored as canonical symbol code and commands as their
// rendered text, so the document is readable and diffable.
nlohmann::json to_json(const AnnotationRecord& record);
AnnotationRecord annotation_from_json(const nlohmann::json& j);

// True when every command's arm appears on some symbol of `set`. Sets whose
// symbols are all unarmed place no constraint.
bool arms_match(const std::vector<LowLevelCommand>& commands, const symbols::SymbolSet& set);

// Cross-field invariants that must hold for a Finalized record. Returns one
// message per problem; empty means consistent. Frame-list membership is
// checked separately because it needs the trajectory store.
std::vector<std::string> consistency_problems(const AnnotationRecord& record);

}  // namespace symguide::annotation
