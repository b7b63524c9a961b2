#include "symguide/vqa/generator.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "symguide/common/errors.hpp"
#include "symguide/common/random.hpp"
#include "symguide/symbols/codec.hpp"

namespace symguide::vqa {

using annotation::AnnotationRecord;
using symbols::SetPurpose;

namespace {

const AnnotationRecord& finalized(const TrajectoryView& v) {
  if (v.annotation.stage != annotation::Stage::Finalized) {
    throw InvalidArgument(v.meta.id + " is not finalized");
  }
  return v.annotation;
}

const AnnotationRecord& failed(const TrajectoryView& v) {
  const auto& r = finalized(v);
  if (r.diagnosis.success) throw NotAFailure(v.meta.id + " succeeded");
  return r;
}

std::string task_line(const TrajectoryView& v) {
  return "The robot is performing the task \"" + v.meta.task_instruction + "\".";
}

std::vector<MediaRef> frame_media(const TrajectoryView& v) {
  std::vector<MediaRef> media;
  for (std::size_t i = 0; i < v.samples.size(); ++i) {
    media.push_back({"frame", v.sample_paths.at(i), v.samples[i].frame_index, v.samples[i].timestamp_s});
  }
  return media;
}

MediaRef keyframe_media(const TrajectoryView& v) {
  const auto& key = *v.annotation.diagnosis.failure_keyframe;
  if (!v.keyframe_path) throw InvalidArgument(v.meta.id + " has no keyframe path");
  return {"keyframe", *v.keyframe_path, key.frame_index, key.timestamp_s};
}

std::string options_block(const std::vector<std::string>& options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    out += std::string(1, option_letter(i)) + ". " + options[i] + "\n";
  }
  return out;
}

// Three distinct entries of `pool` other than `truth`.
std::vector<std::string> sample_distractors(const std::vector<std::string>& pool,
                                            const std::string& truth, Rng& rng,
                                            const std::string& what) {
  std::vector<std::string> candidates;
  std::set<std::string> seen{truth};
  for (const auto& p : pool) {
    if (seen.insert(p).second) candidates.push_back(p);
  }
  if (candidates.size() < 3) {
    throw InsufficientPool("only " + std::to_string(candidates.size()) + " " + what +
                           " distractors besides \"" + truth + "\"");
  }
  rng.shuffle(candidates);
  candidates.resize(3);
  return candidates;
}

const std::vector<annotation::LowLevelCommand>& low_level(const AnnotationRecord& r,
                                                          SetPurpose purpose) {
  return purpose == SetPurpose::Avoidance ? r.guidance.low_level_avoidance
                                          : r.guidance.low_level_correction;
}

std::string purpose_word(SetPurpose p) { return p == SetPurpose::Avoidance ? "avoid" : "recover from"; }

}  // namespace

std::string keyframe_option(double timestamp_s) {
  std::ostringstream os;
  os << timestamp_s << " s";
  return os.str();
}

std::string pair_id(const std::string& trajectory_id, QuestionType type,
                    std::optional<SetPurpose> purpose) {
  std::string id = trajectory_id + "/" + std::string(to_token(type));
  if (purpose) id += "/" + std::string(symbols::to_token(*purpose));
  return id;
}

AnnotationPools build_pools(const std::vector<TrajectoryView>& views) {
  std::set<std::string> subtasks;
  std::set<std::string> keyframes;
  for (const auto& v : views) {
    for (const auto& s : v.annotation.subtask_plan.subtasks) subtasks.insert(s);
    for (const auto& f : v.samples) keyframes.insert(keyframe_option(f.timestamp_s));
  }
  return {{subtasks.begin(), subtasks.end()}, {keyframes.begin(), keyframes.end()}};
}

VqaPair gen_closed(const TrajectoryView& v, QuestionType type, const AnnotationPools& pools,
                   const GenerationOptions& gen, std::uint64_t seed) {
  if (!is_closed(type)) throw InvalidArgument(std::string(to_token(type)) + " is not closed-ended");
  const auto& r = finalized(v);
  VqaPair p;
  p.id = pair_id(v.meta.id, type);
  p.question_type = type;
  p.trajectory_id = v.meta.id;
  p.task_id = v.meta.task_id;
  p.seed = derive_seed(seed, p.id);
  Rng rng(p.seed);

  std::string question;
  std::string truth;
  std::vector<std::string> distractors;

  if (type == QuestionType::FailureDetection) {
    const std::string yes = "Yes, the task was completed successfully.";
    const std::string no = "No, the task failed.";
    truth = r.diagnosis.success ? yes : no;
    distractors = {r.diagnosis.success ? no : yes};
    question = "The images are frames sampled at 1 fps from the whole episode. "
               "Did the robot complete the task?";
    p.media = frame_media(v);
  } else {
    failed(v);
    const auto& d = r.diagnosis;
    switch (type) {
      case QuestionType::FailureKeyframeLoc: {
        truth = keyframe_option(d.failure_keyframe->timestamp_s);
        std::vector<std::string> own;
        for (const auto& f : v.samples) own.push_back(keyframe_option(f.timestamp_s));
        distractors = sample_distractors(own.size() >= 4 ? own : pools.keyframe_options, truth,
                                         rng, "keyframe");
        question = "The images are frames sampled at 1 fps; the robot fails this task. "
                   "At which moment does the failure become unavoidable?";
        p.media = frame_media(v);
        break;
      }
      case QuestionType::FailureSubtaskLoc: {
        const auto& plan = r.subtask_plan.subtasks;
        truth = plan.at(*d.failure_subtask_index);
        distractors = sample_distractors(plan.size() >= 4 ? plan : pools.subtasks, truth, rng,
                                         "subtask");
        question = "The images are frames sampled at 1 fps and the last image is the moment of "
                   "failure. During which subtask does the robot fail?";
        p.media = frame_media(v);
        p.media.push_back(keyframe_media(v));
        break;
      }
      case QuestionType::FailureTypeId: {
        truth = std::string(annotation::display_name(*d.failure_type));
        for (auto t : annotation::kAllFailureTypes) {
          if (t != *d.failure_type) distractors.emplace_back(annotation::display_name(t));
        }
        question = "The images are frames sampled at 1 fps and the last image is the moment of "
                   "failure. What type of failure is this?";
        p.media = frame_media(v);
        p.media.push_back(keyframe_media(v));
        break;
      }
      case QuestionType::LowLevelAvoidance:
      case QuestionType::LowLevelCorrection: {
        const auto purpose = type == QuestionType::LowLevelAvoidance ? SetPurpose::Avoidance
                                                                     : SetPurpose::Correction;
        const auto& cmds = low_level(r, purpose);
        if (cmds.empty()) throw InvalidArgument(v.meta.id + " has no low-level guidance of that kind");
        truth = annotation::render_commands(cmds);
        distractors = gen_low_level_distractors(cmds, gen.static_pool, gen.dynamic_pool,
                                                derive_seed(p.seed, "distractors"));
        question = purpose == SetPurpose::Avoidance
                       ? "The image shows the moment just before the robot fails. Which low-level "
                         "action should the robot take to avoid the failure?"
                       : "The image shows the moment the robot fails. Which low-level action "
                         "should the robot take to recover from the failure?";
        p.media = {keyframe_media(v)};
        break;
      }
      default:
        break;
    }
  }

  p.options = distractors;
  p.options.push_back(truth);
  rng.shuffle(p.options);
  const auto idx = static_cast<std::size_t>(
      std::find(p.options.begin(), p.options.end(), truth) - p.options.begin());
  p.answer = std::string(1, option_letter(idx));
  p.answer_text = truth;
  p.prompt = task_line(v) + " " + question + "\n" + options_block(p.options) +
             "Answer with the letter of the correct option.";
  return p;
}

std::string cot_answer(const TrajectoryView& v, SetPurpose purpose) {
  const auto& r = failed(v);
  const auto& d = r.diagnosis;
  const int subtask = *d.failure_subtask_index;
  std::ostringstream os;
  os << "Failure detection: The robot fails the task.\n";
  os << "Failure localization: The failure happens at " << keyframe_option(d.failure_keyframe->timestamp_s)
     << ", during subtask " << subtask + 1 << " (" << r.subtask_plan.subtasks.at(subtask)
     << "), and is a " << annotation::display_name(*d.failure_type) << " failure.\n";
  os << "Low-level guidance: " << annotation::render_commands(low_level(r, purpose)) << ".";
  return os.str();
}

VqaPair gen_open(const TrajectoryView& v, QuestionType type, std::uint64_t seed) {
  if (!is_open(type)) throw InvalidArgument(std::string(to_token(type)) + " is not open-ended");
  const auto& r = failed(v);
  VqaPair p;
  p.id = pair_id(v.meta.id, type);
  p.question_type = type;
  p.trajectory_id = v.meta.id;
  p.task_id = v.meta.task_id;
  p.seed = derive_seed(seed, p.id);
  p.media = frame_media(v);

  std::string question;
  switch (type) {
    case QuestionType::FailureReason:
      question = "The robot fails this task. Explain why the failure happens.";
      p.answer_text = *r.diagnosis.failure_reason;
      break;
    case QuestionType::HighLevelAvoidance:
      question = "The robot fails this task. Describe how the robot should act to avoid the failure.";
      p.answer_text = *r.guidance.high_level_avoidance;
      break;
    case QuestionType::HighLevelCorrection:
      question = "The robot fails this task. Describe how the robot should recover from the failure.";
      p.answer_text = *r.guidance.high_level_correction;
      break;
    case QuestionType::LowLevelAvoidanceCoT:
    case QuestionType::LowLevelCorrectionCoT: {
      const auto purpose = type == QuestionType::LowLevelAvoidanceCoT ? SetPurpose::Avoidance
                                                                      : SetPurpose::Correction;
      if (low_level(r, purpose).empty()) {
        throw InvalidArgument(v.meta.id + " has no low-level guidance of that kind");
      }
      question = "Think step by step. First decide whether the robot fails, then locate when and "
                 "in which subtask it fails, then give low-level actions to " +
                 purpose_word(purpose) +
                 " the failure. Answer in three lines starting with \"Failure detection:\", "
                 "\"Failure localization:\" and \"Low-level guidance:\".";
      p.cot_answer = cot_answer(v, purpose);
      p.answer_text = *p.cot_answer;
      break;
    }
    default:
      break;
  }
  p.answer = p.answer_text;
  p.prompt = task_line(v) + " The images are frames sampled at 1 fps from the whole episode. " + question;
  return p;
}

VqaPair gen_visual_guidance(const TrajectoryView& v, SetPurpose purpose, std::uint64_t seed) {
  const auto& r = failed(v);
  const auto& set = purpose == SetPurpose::Avoidance ? r.guidance.avoidance_symbols
                                                     : r.guidance.correction_symbols;
  if (!set) {
    throw MissingSymbols(v.meta.id + " has no " + std::string(symbols::to_token(purpose)) + " symbols");
  }
  VqaPair p;
  p.question_type = QuestionType::VisualGuidanceCode;
  p.id = pair_id(v.meta.id, p.question_type, purpose);
  p.trajectory_id = v.meta.id;
  p.task_id = v.meta.task_id;
  p.seed = derive_seed(seed, p.id);
  p.guidance_purpose = purpose;
  p.frame_width = v.frame_width;
  p.frame_height = v.frame_height;
  if (purpose == SetPurpose::Avoidance) {
    p.media = {keyframe_media(v)};
  } else {
    const std::string path = v.correction_frame_path.value_or(v.keyframe_path.value_or(""));
    p.media = {{"keyframe", path, set->frame_index, 0.0}};
  }
  p.symbol_code_answer = symbols::emit_symbol_code(*set);
  p.answer = *p.symbol_code_answer;
  p.answer_text = *p.symbol_code_answer;
  p.prompt = task_line(v) + " The image is frame " + std::to_string(set->frame_index) + " (" +
             std::to_string(v.frame_width) + "x" + std::to_string(v.frame_height) +
             " pixels). Draw visual symbols that show how to " + purpose_word(purpose) +
             " the failure. Write them as symbol code: a header line \"frame=<index> purpose=" +
             std::string(symbols::to_token(purpose)) +
             "\" followed by one symbol per line, for example "
             "\"straight_arrow(arm=left, color=green, start=(120,200), end=(180,200))\".";
  return p;
}

GeneratedPairs generate_pairs(const TrajectoryView& v, const AnnotationPools& pools,
                              const GenerationOptions& gen, std::uint64_t seed) {
  const auto& r = finalized(v);
  GeneratedPairs out;
  auto attempt = [&](const std::string& id, auto&& make) {
    try {
      out.pairs.push_back(make());
    } catch (const InsufficientPool& e) {
      out.skipped.push_back({id, e.what()});
    }
  };
  attempt(pair_id(v.meta.id, QuestionType::FailureDetection),
          [&] { return gen_closed(v, QuestionType::FailureDetection, pools, gen, seed); });
  if (r.diagnosis.success) return out;

  const auto& g = r.guidance;
  for (auto type : {QuestionType::FailureKeyframeLoc, QuestionType::FailureSubtaskLoc,
                    QuestionType::FailureTypeId}) {
    attempt(pair_id(v.meta.id, type), [&] { return gen_closed(v, type, pools, gen, seed); });
  }
  if (!g.low_level_avoidance.empty()) {
    attempt(pair_id(v.meta.id, QuestionType::LowLevelAvoidance),
            [&] { return gen_closed(v, QuestionType::LowLevelAvoidance, pools, gen, seed); });
  }
  if (!g.low_level_correction.empty()) {
    attempt(pair_id(v.meta.id, QuestionType::LowLevelCorrection),
            [&] { return gen_closed(v, QuestionType::LowLevelCorrection, pools, gen, seed); });
  }
  if (!g.low_level_avoidance.empty()) {
    out.pairs.push_back(gen_open(v, QuestionType::LowLevelAvoidanceCoT, seed));
  }
  if (!g.low_level_correction.empty()) {
    out.pairs.push_back(gen_open(v, QuestionType::LowLevelCorrectionCoT, seed));
  }
  for (auto type : {QuestionType::FailureReason, QuestionType::HighLevelAvoidance,
                    QuestionType::HighLevelCorrection}) {
    out.pairs.push_back(gen_open(v, type, seed));
  }
  if (g.avoidance_symbols) out.pairs.push_back(gen_visual_guidance(v, SetPurpose::Avoidance, seed));
  if (g.correction_symbols) out.pairs.push_back(gen_visual_guidance(v, SetPurpose::Correction, seed));
  return out;
}

}  // namespace symguide::vqa
