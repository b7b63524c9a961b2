#include "symguide/eval/judge.hpp"

#include <cmath>
#include <regex>
#include <sstream>

#include "symguide/common/errors.hpp"

namespace symguide::eval {

using nlohmann::json;

namespace {

constexpr const char* kDims[3] = {"semantic_similarity", "content_completeness",
                                  "functional_equivalence"};

std::string scale_text(double scale) {
  std::ostringstream os;
  os << scale;
  return os.str();
}

std::optional<double> from_json_object(const std::string& text, const char* key) {
  const auto b = text.find('{');
  const auto e = text.rfind('}');
  if (b == std::string::npos || e == std::string::npos || e < b) return std::nullopt;
  const auto j = json::parse(text.substr(b, e - b + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains(key)) return std::nullopt;
  if (j[key].is_number()) return j[key].get<double>();
  if (j[key].is_string()) {
    try {
      return std::stod(j[key].get<std::string>());
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<double> from_lines(const std::string& text, const char* key) {
  std::string words = key;
  for (char& c : words) {
    if (c == '_') c = ' ';
  }
  const std::regex re("(?:" + std::string(key) + "|" + words +
                          ")\\W{0,4}\\s*([0-9]+(?:\\.[0-9]+)?)",
                      std::regex::icase);
  std::smatch m;
  if (std::regex_search(text, m, re)) return std::stod(m[1].str());
  return std::nullopt;
}

}  // namespace

JudgeScore make_judge_score(double s, double c, double f, std::string raw) {
  return JudgeScore{s, c, f, (s + c + f) / 3.0, std::move(raw)};
}

std::string judge_prompt(const std::string& question, const std::string& reference,
                         const std::string& answer, double scale) {
  const std::string max = scale_text(scale);
  return "You are grading an answer about a robot manipulation episode against a reference "
         "answer.\n\nQuestion:\n" +
         question + "\n\nReference answer:\n" + reference + "\n\nModel answer:\n" + answer +
         "\n\nRate the model answer on three dimensions, each from 0 to " + max +
         ":\n- semantic_similarity: how close its meaning is to the reference.\n"
         "- content_completeness: how much of the reference content it covers.\n"
         "- functional_equivalence: whether acting on it would have the same effect on the robot "
         "as acting on the reference.\nReply with a JSON object only, for example "
         "{\"semantic_similarity\": 0, \"content_completeness\": 0, \"functional_equivalence\": 0}.";
}

std::string judge_format_reminder() {
  return "\n\nYour previous reply could not be read. Reply with exactly one JSON object with the "
         "three numeric fields semantic_similarity, content_completeness and "
         "functional_equivalence, and nothing else.";
}

JudgeScore parse_judge_response(const std::string& text, double scale) {
  double v[3];
  for (int i = 0; i < 3; ++i) {
    auto value = from_json_object(text, kDims[i]);
    if (!value) value = from_lines(text, kDims[i]);
    if (!value) throw JudgeParseError(std::string("judge reply lacks ") + kDims[i]);
    if (!std::isfinite(*value) || *value < 0 || *value > scale) {
      throw JudgeParseError(std::string(kDims[i]) + " outside [0, " + scale_text(scale) + "]");
    }
    v[i] = *value * (100.0 / scale);
  }
  return make_judge_score(v[0], v[1], v[2], text);
}

json to_json(const JudgeScore& s) {
  return json{{"semantic_similarity", s.semantic_similarity},
              {"content_completeness", s.content_completeness},
              {"functional_equivalence", s.functional_equivalence},
              {"total", s.total},
              {"judge_raw", s.judge_raw}};
}

JudgeScore judge_score_from_json(const json& j) {
  return JudgeScore{j.at("semantic_similarity").get<double>(), j.at("content_completeness").get<double>(),
                    j.at("functional_equivalence").get<double>(), j.at("total").get<double>(),
                    j.value("judge_raw", "")};
}

}  // namespace symguide::eval
