#pragma once

#include <string>

#include "json.hpp"

namespace symguide::eval {

// Scores normalized to 0-100; total is the plain mean of the three.
struct JudgeScore {
  double semantic_similarity = 0;
  double content_completeness = 0;
  double functional_equivalence = 0;
  double total = 0;
  std::string judge_raw;

  friend bool operator==(const JudgeScore&, const JudgeScore&) = default;
};

JudgeScore make_judge_score(double semantic, double completeness, double functional,
                            std::string raw = {});

std::string judge_prompt(const std::string& question, const std::string& reference,
                         const std::string& answer, double scale);

// Appended to the prompt for the single retry after an unparseable reply.
std::string judge_format_reminder();

// Reads the three scores, given on a 0..scale range, from a JSON object in
// the reply or, failing that, from "name: value" lines. JudgeParseError when
// a score is missing or out of range.
JudgeScore parse_judge_response(const std::string& text, double scale);

nlohmann::json to_json(const JudgeScore& s);
JudgeScore judge_score_from_json(const nlohmann::json& j);

}  // namespace symguide::eval
