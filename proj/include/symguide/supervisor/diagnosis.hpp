#pragma once

#include <string>
#include <vector>

#include "symguide/endpoint/chat.hpp"
#include "symguide/supervisor/types.hpp"

namespace symguide::supervisor {

// Reads a chain-of-thought diagnosis. The verdict comes from the
// "Failure detection:" line when present, otherwise from the whole text:
// negations such as "no failure", "succeeds" or "proceeding correctly" mean
// no failure; any other mention of "fail" means failure. Commands are
// matched against the closed vocabulary in the "Low-level guidance:" section
// (whole text if absent). A symbol-code block, when present, must parse.
// Throws ResponseParseError when a failure is reported without any
// recognizable command or with a malformed symbol block.
DiagnosisResponse parse_cot_response(const std::string& text);

// Timestamps, oldest first, of the frames to attach: one per 1/fps step
// back from `now` inside the half-open window (now - window, now], each
// the newest available frame at or before its step. Duplicates collapse.
// `available` must be sorted ascending.
std::vector<double> select_history(const std::vector<double>& available, double now,
                                   double window_s, double fps);

std::string diagnosis_prompt(const SupervisorConfig& config, std::size_t frame_count);

endpoint::ChatRequest diagnosis_request(const SupervisorConfig& config,
                                        const std::vector<Image>& frames);

}  // namespace symguide::supervisor
