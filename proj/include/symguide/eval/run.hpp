#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "symguide/common/clock.hpp"
#include "symguide/endpoint/chat.hpp"
#include "symguide/endpoint/config.hpp"
#include "symguide/eval/harness.hpp"

namespace symguide::eval {

struct EvalRunSpec {
  std::filesystem::path manifest;  // manifest.json of an exported split
  std::string split = "bench";
  endpoint::ModelEndpointConfig model;
  endpoint::ModelEndpointConfig judge;
  std::filesystem::path media_root;  // trajectory store root
};

struct EvalRunOutcome {
  std::vector<ItemResult> items;
  EvalReport report;
  nlohmann::json metadata;
};

// Loads the split, runs every pair and writes the run directory (see
// write_eval_run). Metadata records both endpoint configs (without keys),
// the manifest seed and spec hash, pair counts and start/end times.
EvalRunOutcome execute_eval_run(const EvalRunSpec& spec, const std::filesystem::path& out_dir,
                                endpoint::ChatEndpoint& model, endpoint::ChatEndpoint& judge,
                                const Clock& clock = system_clock());

// Same, talking to the configured HTTP endpoints.
EvalRunOutcome execute_eval_run(const EvalRunSpec& spec, const std::filesystem::path& out_dir,
                                const Clock& clock = system_clock());

}  // namespace symguide::eval
