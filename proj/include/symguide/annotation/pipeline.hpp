#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symguide/annotation/record.hpp"
#include "symguide/common/clock.hpp"
#include "symguide/endpoint/chat.hpp"
#include "symguide/store/store.hpp"
#include "symguide/symbols/validate.hpp"

namespace symguide::annotation {

struct Stage1Input {
  bool success = false;
  std::optional<double> keyframe_timestamp_s;
  std::optional<int> failure_subtask_index;
  std::optional<FailureType> failure_type;
};

struct Stage2Input {
  std::vector<LowLevelCommand> low_level_avoidance;
  std::vector<LowLevelCommand> low_level_correction;
  std::optional<symbols::SymbolSet> avoidance_symbols;
  std::optional<symbols::SymbolSet> correction_symbols;
};

struct Stage3Drafts {
  std::string failure_reason;
  std::string high_level_avoidance;
  std::string high_level_correction;
};

struct EditedTexts {
  std::optional<std::string> failure_reason;
  std::optional<std::string> high_level_avoidance;
  std::optional<std::string> high_level_correction;
};

// Parses a JSON array of strings or a numbered / bulleted list, optionally
// inside a code fence. Throws ResponseParseError when nothing usable is found.
std::vector<std::string> parse_subtask_list(const std::string& text);

// Asks the endpoint to split an instruction into ordered subtasks.
// EndpointError propagates unchanged so callers can fall back to manual entry.
store::SubtaskPlan decompose_task(const std::string& trajectory_id,
                                  const std::string& task_instruction,
                                  endpoint::ChatEndpoint& assist);

// Replaces one subtask's text and marks the plan as manually edited.
store::SubtaskPlan edit_subtask(store::SubtaskPlan plan, std::size_t index, std::string text);

// Extracts the three draft texts from a JSON object in the reply. Throws
// ResponseParseError when any field is missing or blank.
Stage3Drafts parse_stage3_response(const std::string& text);

// Stage transitions. Every operation is a pure function of its inputs and the
// store contents: it returns the new record and never modifies the argument.
class AnnotationPipeline {
 public:
  explicit AnnotationPipeline(const store::TrajectoryStore& store, Clock clock = system_clock());

  AnnotationRecord record_stage1(const std::optional<AnnotationRecord>& existing,
                                 const std::string& trajectory_id, const Stage1Input& input,
                                 const std::string& annotator_id) const;

  AnnotationRecord record_stage2(const AnnotationRecord& record, const Stage2Input& input,
                                 const std::string& annotator_id) const;

  // Request sent by vlm_assist_stage3: the keyframe with the avoidance
  // overlay first, the correction overlay second when present.
  endpoint::ChatRequest stage3_request(const AnnotationRecord& record) const;

  // Successful trajectories have nothing to explain and skip the endpoint.
  AnnotationRecord vlm_assist_stage3(const AnnotationRecord& record,
                                     endpoint::ChatEndpoint& assist) const;

  AnnotationRecord finalize(const AnnotationRecord& record, const EditedTexts& edits,
                            const std::string& annotator_id) const;

  // consistency_problems plus checks that need the store (keyframe on the
  // sample grid, symbol sets within frame bounds).
  std::vector<std::string> problems(const AnnotationRecord& record) const;

 private:
  symbols::FrameDims frame_dims(const std::string& id, int frame_index) const;
  AnnotationRecord touched(AnnotationRecord record, const std::string& annotator_id) const;

  const store::TrajectoryStore& store_;
  Clock clock_;
};

}  // namespace symguide::annotation
