#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "symguide/annotation/record.hpp"
#include "symguide/store/types.hpp"
#include "symguide/vqa/distractors.hpp"
#include "symguide/vqa/types.hpp"

namespace symguide::vqa {

// Everything generation needs about one annotated trajectory, resolved from
// the store up front so generation itself touches no files.
struct TrajectoryView {
  store::TrajectoryRecord meta;
  annotation::AnnotationRecord annotation;
  std::vector<store::FrameRef> samples;   // uniform 1 fps grid
  std::vector<std::string> sample_paths;  // store-relative, parallel to `samples`
  std::optional<std::string> keyframe_path;
  std::optional<std::string> correction_frame_path;
  int frame_width = 0;
  int frame_height = 0;
};

// Dataset-wide answer pools for distractors.
struct AnnotationPools {
  std::vector<std::string> subtasks;
  std::vector<std::string> keyframe_options;
};

AnnotationPools build_pools(const std::vector<TrajectoryView>& views);

struct GenerationOptions {
  StaticPool static_pool = default_static_pool();
  std::vector<annotation::LowLevelCommand> dynamic_pool = full_dynamic_pool();
};

// "4 s"
std::string keyframe_option(double timestamp_s);

std::string pair_id(const std::string& trajectory_id, QuestionType type,
                    std::optional<symbols::SetPurpose> purpose = std::nullopt);

// Closed-ended pair. The failure-detection question has two options, the
// others four. Distractors for keyframe and subtask questions come from the
// trajectory itself when it has at least 4 entries, otherwise from `pools`.
VqaPair gen_closed(const TrajectoryView& view, QuestionType type, const AnnotationPools& pools,
                   const GenerationOptions& options, std::uint64_t seed);

// Open-ended pair for a failed trajectory. NotAFailure on successes.
VqaPair gen_open(const TrajectoryView& view, QuestionType type, std::uint64_t seed);

// Symbol-code pair for the avoidance or correction set. MissingSymbols when
// the record has no such set.
VqaPair gen_visual_guidance(const TrajectoryView& view, symbols::SetPurpose purpose,
                            std::uint64_t seed);

// The step-by-step answer for the CoT guidance questions.
std::string cot_answer(const TrajectoryView& view, symbols::SetPurpose purpose);

struct Skipped {
  std::string pair_id;
  std::string reason;
};

struct GeneratedPairs {
  std::vector<VqaPair> pairs;
  std::vector<Skipped> skipped;
};

// One pair per applicable type. Successful trajectories yield only failure
// detection; failed ones yield every type whose annotation is present.
// Pairs whose distractor pool is too small are skipped and reported.
GeneratedPairs generate_pairs(const TrajectoryView& view, const AnnotationPools& pools,
                              const GenerationOptions& options, std::uint64_t seed);

}  // namespace symguide::vqa
