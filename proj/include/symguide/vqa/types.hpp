#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "symguide/symbols/types.hpp"

namespace symguide::vqa {

enum class QuestionType {
  // closed-ended (Lite)
  FailureDetection,
  FailureKeyframeLoc,
  FailureSubtaskLoc,
  FailureTypeId,
  LowLevelAvoidance,
  LowLevelCorrection,
  // open-ended (Hard)
  LowLevelAvoidanceCoT,
  LowLevelCorrectionCoT,
  FailureReason,
  HighLevelAvoidance,
  HighLevelCorrection,
  // symbol-code generation, scored separately
  VisualGuidanceCode,
};

inline constexpr QuestionType kBenchmarkTypes[] = {
    QuestionType::FailureDetection,     QuestionType::FailureKeyframeLoc,
    QuestionType::FailureSubtaskLoc,    QuestionType::FailureTypeId,
    QuestionType::LowLevelAvoidance,    QuestionType::LowLevelCorrection,
    QuestionType::LowLevelAvoidanceCoT, QuestionType::LowLevelCorrectionCoT,
    QuestionType::FailureReason,        QuestionType::HighLevelAvoidance,
    QuestionType::HighLevelCorrection};

inline constexpr QuestionType kAllQuestionTypes[] = {
    QuestionType::FailureDetection,     QuestionType::FailureKeyframeLoc,
    QuestionType::FailureSubtaskLoc,    QuestionType::FailureTypeId,
    QuestionType::LowLevelAvoidance,    QuestionType::LowLevelCorrection,
    QuestionType::LowLevelAvoidanceCoT, QuestionType::LowLevelCorrectionCoT,
    QuestionType::FailureReason,        QuestionType::HighLevelAvoidance,
    QuestionType::HighLevelCorrection,  QuestionType::VisualGuidanceCode};

std::string_view to_token(QuestionType type);  // "failure_detection"
std::optional<QuestionType> question_type_from_token(std::string_view token);

constexpr bool is_closed(QuestionType t) {
  return t == QuestionType::FailureDetection || t == QuestionType::FailureKeyframeLoc ||
         t == QuestionType::FailureSubtaskLoc || t == QuestionType::FailureTypeId ||
         t == QuestionType::LowLevelAvoidance || t == QuestionType::LowLevelCorrection;
}
constexpr bool is_open(QuestionType t) {
  return !is_closed(t) && t != QuestionType::VisualGuidanceCode;
}

struct MediaRef {
  std::string role;  // "frame" (sampled sequence) or "keyframe"
  std::string path;  // relative to the trajectory store root
  int frame_index = 0;
  double timestamp_s = 0.0;

  friend bool operator==(const MediaRef&, const MediaRef&) = default;
};

struct VqaPair {
  std::string id;
  QuestionType question_type = QuestionType::FailureDetection;
  std::string trajectory_id;
  int task_id = 0;
  std::string prompt;
  std::vector<MediaRef> media;
  std::vector<std::string> options;  // closed-ended only
  std::string answer;                // option letter (closed) or reference text (open)
  std::string answer_text;           // text of the correct option, or the reference text
  std::optional<std::string> cot_answer;
  std::optional<std::string> symbol_code_answer;
  std::optional<symbols::SetPurpose> guidance_purpose;  // visual guidance only
  std::optional<int> frame_width;
  std::optional<int> frame_height;
  std::uint64_t seed = 0;

  friend bool operator==(const VqaPair&, const VqaPair&) = default;
};

inline char option_letter(std::size_t index) { return static_cast<char>('A' + index); }

nlohmann::json to_json(const VqaPair& pair);
VqaPair vqa_pair_from_json(const nlohmann::json& j);

}  // namespace symguide::vqa
