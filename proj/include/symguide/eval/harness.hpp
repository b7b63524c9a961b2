#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "symguide/endpoint/chat.hpp"
#include "symguide/eval/choice.hpp"
#include "symguide/eval/judge.hpp"
#include "symguide/eval/symbol_score.hpp"
#include "symguide/vqa/types.hpp"

namespace symguide::eval {

// Benchmark half an item belongs to: closed-ended types are "lite",
// open-ended "hard", symbol-code generation "visual".
std::string_view split_of(vqa::QuestionType type);

struct ItemResult {
  std::string pair_id;
  vqa::QuestionType question_type = vqa::QuestionType::FailureDetection;
  std::string response;                 // raw model reply ("" when errored)
  std::optional<char> extracted;        // closed-ended
  std::optional<JudgeScore> judge;      // open-ended
  std::optional<std::string> symbol_reason;  // visual guidance
  bool correct = false;
  double score = 0;  // 0-100; closed and visual: 0 or 100; open: judge total
  bool errored = false;  // endpoint failure: counts as 0 in the denominator
  bool flagged = false;  // judge reply unusable after retry: excluded
  std::string error;

  friend bool operator==(const ItemResult&, const ItemResult&) = default;
};

nlohmann::json to_json(const ItemResult& r);
ItemResult item_result_from_json(const nlohmann::json& j);

// Builds the images for a pair's media.
using MediaResolver = std::function<std::vector<endpoint::ChatImage>(const vqa::VqaPair&)>;

// Reads media files relative to a trajectory store root.
MediaResolver file_media(std::filesystem::path root);
// Sends no images; for text-only mocks.
MediaResolver no_media();

endpoint::ChatRequest pair_request(const vqa::VqaPair& pair, const MediaResolver& media);

struct RunOptions {
  std::size_t concurrency = 4;
  double judge_scale = 100.0;
};

std::vector<ItemResult> run_closed_eval(const std::vector<vqa::VqaPair>& pairs,
                                        endpoint::ChatEndpoint& model, const MediaResolver& media,
                                        const RunOptions& options = {});

std::vector<ItemResult> run_open_eval(const std::vector<vqa::VqaPair>& pairs,
                                      endpoint::ChatEndpoint& model,
                                      endpoint::ChatEndpoint& judge, const MediaResolver& media,
                                      const RunOptions& options = {});

std::vector<ItemResult> run_visual_eval(const std::vector<vqa::VqaPair>& pairs,
                                        endpoint::ChatEndpoint& model, const MediaResolver& media,
                                        const RunOptions& options = {});

// Dispatches every pair to the matching runner; results follow input order.
std::vector<ItemResult> run_benchmark(const std::vector<vqa::VqaPair>& pairs,
                                      endpoint::ChatEndpoint& model,
                                      endpoint::ChatEndpoint& judge, const MediaResolver& media,
                                      const RunOptions& options = {});

struct TypeAccuracy {
  std::size_t items = 0;    // all items of the type
  std::size_t scored = 0;   // items in the denominator (flagged ones are not)
  std::size_t errored = 0;
  std::size_t flagged = 0;
  double accuracy = 0;      // mean item score over scored items, 0-100
};

struct EvalReport {
  std::map<std::string, TypeAccuracy> per_type;  // keyed by question-type token
  std::optional<double> lite_average;   // unweighted mean over lite types present
  std::optional<double> hard_average;
  std::optional<double> overall_average;  // mean of the lite and hard averages
  std::optional<double> item_weighted_average;  // mean over all scored lite+hard items
  std::optional<double> visual_match_rate;
  std::size_t total_items = 0;
  std::size_t errored_items = 0;
  std::size_t flagged_items = 0;
};

// Order-independent: items are sorted by pair id before summation, so the
// result is bit-identical for any permutation. EmptyResults when nothing
// was scored.
EvalReport aggregate_report(std::vector<ItemResult> items);

nlohmann::json to_json(const EvalReport& report);
std::string report_table(const EvalReport& report);

// Writes <dir>/items.jsonl (one line per item, sorted by pair id),
// <dir>/report.json ({"schema_version", "run", "report"}) and <dir>/report.txt.
void write_eval_run(const std::filesystem::path& dir, const std::vector<ItemResult>& items,
                    const EvalReport& report, const nlohmann::json& run_metadata);

std::vector<ItemResult> read_items_jsonl(const std::filesystem::path& path);

// Re-aggregates <dir>/items.jsonl.
EvalReport recompute_report(const std::filesystem::path& dir);

}  // namespace symguide::eval
