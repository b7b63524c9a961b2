#include "symguide/vqa/types.hpp"

#include "symguide/common/errors.hpp"

namespace symguide::vqa {

using nlohmann::json;

std::string_view to_token(QuestionType type) {
  switch (type) {
    case QuestionType::FailureDetection: return "failure_detection";
    case QuestionType::FailureKeyframeLoc: return "failure_keyframe_localization";
    case QuestionType::FailureSubtaskLoc: return "failure_subtask_localization";
    case QuestionType::FailureTypeId: return "failure_type_identification";
    case QuestionType::LowLevelAvoidance: return "low_level_avoidance";
    case QuestionType::LowLevelCorrection: return "low_level_correction";
    case QuestionType::LowLevelAvoidanceCoT: return "low_level_avoidance_cot";
    case QuestionType::LowLevelCorrectionCoT: return "low_level_correction_cot";
    case QuestionType::FailureReason: return "failure_reason";
    case QuestionType::HighLevelAvoidance: return "high_level_avoidance";
    case QuestionType::HighLevelCorrection: return "high_level_correction";
    case QuestionType::VisualGuidanceCode: return "visual_guidance_code";
  }
  return "";
}

std::optional<QuestionType> question_type_from_token(std::string_view token) {
  for (QuestionType t : kAllQuestionTypes) {
    if (to_token(t) == token) return t;
  }
  return std::nullopt;
}

json to_json(const VqaPair& p) {
  json media = json::array();
  for (const auto& m : p.media) {
    media.push_back({{"role", m.role},
                     {"path", m.path},
                     {"frame_index", m.frame_index},
                     {"timestamp_s", m.timestamp_s}});
  }
  json j{{"id", p.id},
         {"question_type", to_token(p.question_type)},
         {"trajectory_id", p.trajectory_id},
         {"task_id", p.task_id},
         {"prompt", p.prompt},
         {"media", media},
         {"answer", p.answer},
         {"answer_text", p.answer_text},
         {"seed", p.seed}};
  j["options"] = p.options.empty() ? json(nullptr) : json(p.options);
  j["cot_answer"] = p.cot_answer ? json(*p.cot_answer) : json(nullptr);
  j["symbol_code_answer"] = p.symbol_code_answer ? json(*p.symbol_code_answer) : json(nullptr);
  j["guidance_purpose"] =
      p.guidance_purpose ? json(symbols::to_token(*p.guidance_purpose)) : json(nullptr);
  j["frame_width"] = p.frame_width ? json(*p.frame_width) : json(nullptr);
  j["frame_height"] = p.frame_height ? json(*p.frame_height) : json(nullptr);
  return j;
}

VqaPair vqa_pair_from_json(const json& j) {
  try {
    VqaPair p;
    p.id = j.at("id").get<std::string>();
    const auto type = question_type_from_token(j.at("question_type").get<std::string>());
    if (!type) throw InvalidArgument("unknown question_type in pair " + p.id);
    p.question_type = *type;
    p.trajectory_id = j.at("trajectory_id").get<std::string>();
    p.task_id = j.value("task_id", 0);
    p.prompt = j.at("prompt").get<std::string>();
    for (const auto& m : j.at("media")) {
      p.media.push_back({m.at("role").get<std::string>(), m.at("path").get<std::string>(),
                         m.value("frame_index", 0), m.value("timestamp_s", 0.0)});
    }
    if (j.contains("options") && !j["options"].is_null()) {
      p.options = j["options"].get<std::vector<std::string>>();
    }
    p.answer = j.at("answer").get<std::string>();
    p.answer_text = j.value("answer_text", "");
    auto opt_string = [&](const char* key) -> std::optional<std::string> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      return j[key].get<std::string>();
    };
    p.cot_answer = opt_string("cot_answer");
    p.symbol_code_answer = opt_string("symbol_code_answer");
    if (auto purpose = opt_string("guidance_purpose")) {
      p.guidance_purpose = symbols::purpose_from_token(*purpose);
    }
    if (j.contains("frame_width") && !j["frame_width"].is_null()) p.frame_width = j["frame_width"].get<int>();
    if (j.contains("frame_height") && !j["frame_height"].is_null()) p.frame_height = j["frame_height"].get<int>();
    p.seed = j.value("seed", std::uint64_t{0});
    return p;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("VQA pair: ") + e.what());
  }
}

}  // namespace symguide::vqa
