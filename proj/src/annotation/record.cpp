#include "symguide/annotation/record.hpp"

#include <algorithm>

#include "symguide/common/errors.hpp"
#include "symguide/symbols/codec.hpp"

namespace symguide::annotation {

using nlohmann::json;

std::string_view to_token(FailureType type) {
  switch (type) {
    case FailureType::TaskPlanning: return "task_planning";
    case FailureType::Gripper6dPose: return "gripper_6d_pose";
    case FailureType::GripperState: return "gripper_state";
    case FailureType::HumanIntervention: return "human_intervention";
  }
  return "";
}

std::string_view display_name(FailureType type) {
  switch (type) {
    case FailureType::TaskPlanning: return "Task planning";
    case FailureType::Gripper6dPose: return "Gripper 6D pose";
    case FailureType::GripperState: return "Gripper state";
    case FailureType::HumanIntervention: return "Human intervention";
  }
  return "";
}

std::optional<FailureType> failure_type_from_token(std::string_view token) {
  for (FailureType t : kAllFailureTypes) {
    if (to_token(t) == token) return t;
  }
  return std::nullopt;
}

std::string_view to_token(Stage stage) {
  switch (stage) {
    case Stage::Stage1Done: return "stage1_done";
    case Stage::Stage2Done: return "stage2_done";
    case Stage::Stage3Draft: return "stage3_draft";
    case Stage::Finalized: return "finalized";
  }
  return "";
}

std::optional<Stage> stage_from_token(std::string_view token) {
  for (Stage s : {Stage::Stage1Done, Stage::Stage2Done, Stage::Stage3Draft, Stage::Finalized}) {
    if (to_token(s) == token) return s;
  }
  return std::nullopt;
}

namespace {

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json commands_json(const std::vector<LowLevelCommand>& cmds) {
  json a = json::array();
  for (const auto& c : cmds) a.push_back(render_command(c));
  return a;
}

std::vector<LowLevelCommand> commands_from(const json& a) {
  std::vector<LowLevelCommand> out;
  for (const auto& t : a) {
    auto c = parse_command(t.get<std::string>());
    if (!c) throw InvalidArgument("unknown command text: " + t.get<std::string>());
    out.push_back(*c);
  }
  return out;
}

json symbols_json(const std::optional<symbols::SymbolSet>& s) {
  return s ? json(symbols::emit_symbol_code(*s)) : json(nullptr);
}

std::optional<symbols::SymbolSet> symbols_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return symbols::parse_symbol_code(j.get<std::string>(), std::nullopt);
}

template <class T>
std::optional<T> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

json to_json(const AnnotationRecord& r) {
  const auto& d = r.diagnosis;
  const auto& g = r.guidance;
  json diagnosis{{"success", d.success},
                 {"failure_keyframe", opt(d.failure_keyframe)},
                 {"failure_subtask_index", opt(d.failure_subtask_index)},
                 {"failure_type", d.failure_type ? json(to_token(*d.failure_type)) : json(nullptr)},
                 {"failure_reason", opt(d.failure_reason)}};
  json guidance{{"low_level_avoidance", commands_json(g.low_level_avoidance)},
                {"low_level_correction", commands_json(g.low_level_correction)},
                {"avoidance_symbols", symbols_json(g.avoidance_symbols)},
                {"correction_symbols", symbols_json(g.correction_symbols)},
                {"high_level_avoidance", opt(g.high_level_avoidance)},
                {"high_level_correction", opt(g.high_level_correction)}};
  return json{{"schema_version", kAnnotationSchemaVersion},
              {"trajectory_id", r.trajectory_id},
              {"stage", to_token(r.stage)},
              {"annotator_id", r.annotator_id},
              {"created_at", r.created_at},
              {"updated_at", r.updated_at},
              {"subtask_plan", r.subtask_plan},
              {"diagnosis", diagnosis},
              {"guidance", guidance}};
}

AnnotationRecord annotation_from_json(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kAnnotationSchemaVersion) {
      throw InvalidArgument("unsupported annotation schema_version " + std::to_string(version));
    }
    AnnotationRecord r;
    r.trajectory_id = j.at("trajectory_id").get<std::string>();
    const auto stage = stage_from_token(j.at("stage").get<std::string>());
    if (!stage) throw InvalidArgument("unknown stage");
    r.stage = *stage;
    r.annotator_id = j.value("annotator_id", "");
    r.created_at = j.value("created_at", "");
    r.updated_at = j.value("updated_at", "");
    r.subtask_plan = j.at("subtask_plan").get<store::SubtaskPlan>();

    const auto& d = j.at("diagnosis");
    r.diagnosis.success = d.at("success").get<bool>();
    r.diagnosis.failure_keyframe = opt_from<store::FrameRef>(d, "failure_keyframe");
    r.diagnosis.failure_subtask_index = opt_from<int>(d, "failure_subtask_index");
    if (auto t = opt_from<std::string>(d, "failure_type")) {
      r.diagnosis.failure_type = failure_type_from_token(*t);
      if (!r.diagnosis.failure_type) throw InvalidArgument("unknown failure_type " + *t);
    }
    r.diagnosis.failure_reason = opt_from<std::string>(d, "failure_reason");

    const auto& g = j.at("guidance");
    r.guidance.low_level_avoidance = commands_from(g.at("low_level_avoidance"));
    r.guidance.low_level_correction = commands_from(g.at("low_level_correction"));
    r.guidance.avoidance_symbols = symbols_from(g.at("avoidance_symbols"));
    r.guidance.correction_symbols = symbols_from(g.at("correction_symbols"));
    r.guidance.high_level_avoidance = opt_from<std::string>(g, "high_level_avoidance");
    r.guidance.high_level_correction = opt_from<std::string>(g, "high_level_correction");
    return r;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("annotation document: ") + e.what());
  }
}

bool arms_match(const std::vector<LowLevelCommand>& cmds, const symbols::SymbolSet& set) {
  bool any_armed = false;
  for (const auto& s : set.symbols) any_armed |= s.arm != symbols::Arm::None;
  if (!any_armed) return true;
  for (const auto& c : cmds) {
    const bool found = std::any_of(set.symbols.begin(), set.symbols.end(),
                                   [&](const symbols::SymbolInstance& s) { return s.arm == c.arm; });
    if (!found) return false;
  }
  return true;
}

std::vector<std::string> consistency_problems(const AnnotationRecord& r) {
  std::vector<std::string> problems;
  const auto& d = r.diagnosis;
  const auto& g = r.guidance;
  if (d.success) {
    if (d.failure_keyframe || d.failure_subtask_index || d.failure_type || d.failure_reason) {
      problems.push_back("successful trajectory carries failure diagnosis fields");
    }
    if (!g.empty()) problems.push_back("successful trajectory carries corrective guidance");
    return problems;
  }
  if (!d.failure_keyframe) problems.push_back("failure keyframe missing");
  if (!d.failure_type) problems.push_back("failure type missing");
  if (!d.failure_subtask_index) {
    problems.push_back("failure subtask index missing");
  } else if (*d.failure_subtask_index < 0 ||
             *d.failure_subtask_index >= static_cast<int>(r.subtask_plan.subtasks.size())) {
    problems.push_back("failure subtask index outside the subtask plan");
  }
  if (d.failure_keyframe && d.failure_keyframe->trajectory_id != r.trajectory_id) {
    problems.push_back("failure keyframe belongs to another trajectory");
  }
  if (d.failure_keyframe && g.avoidance_symbols &&
      g.avoidance_symbols->frame_index != d.failure_keyframe->frame_index) {
    problems.push_back("avoidance symbols are not on the failure keyframe");
  }
  if (d.failure_keyframe && g.correction_symbols &&
      g.correction_symbols->frame_index < d.failure_keyframe->frame_index) {
    problems.push_back("correction symbols precede the failure keyframe");
  }
  if (g.avoidance_symbols && g.avoidance_symbols->purpose != symbols::SetPurpose::Avoidance) {
    problems.push_back("avoidance symbols have the wrong purpose");
  }
  if (g.correction_symbols && g.correction_symbols->purpose != symbols::SetPurpose::Correction) {
    problems.push_back("correction symbols have the wrong purpose");
  }
  if (g.avoidance_symbols && !arms_match(g.low_level_avoidance, *g.avoidance_symbols)) {
    problems.push_back("an avoidance command's arm has no matching avoidance symbol");
  }
  if (g.correction_symbols && !arms_match(g.low_level_correction, *g.correction_symbols)) {
    problems.push_back("a correction command's arm has no matching correction symbol");
  }
  if (r.stage == Stage::Finalized) {
    auto blank = [](const std::optional<std::string>& s) {
      return !s || s->find_first_not_of(" \t\r\n") == std::string::npos;
    };
    if (blank(d.failure_reason)) problems.push_back("failure reason is empty");
    if (blank(g.high_level_avoidance)) problems.push_back("high-level avoidance is empty");
    if (blank(g.high_level_correction)) problems.push_back("high-level correction is empty");
  }
  return problems;
}

}  // namespace symguide::annotation
