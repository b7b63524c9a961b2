#include "symguide/annotation/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "symguide/common/errors.hpp"
#include "symguide/symbols/codec.hpp"
#include "symguide/symbols/image.hpp"
#include "symguide/symbols/render.hpp"
#include "symguide/symbols/validate.hpp"

namespace symguide::annotation {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool blank(const std::string& s) { return trim(s).empty(); }

// Everything between the first '[' / '{' and its last matching closer.
std::optional<json> embedded_json(const std::string& text, char open, char close) {
  const auto b = text.find(open);
  const auto e = text.rfind(close);
  if (b == std::string::npos || e == std::string::npos || e < b) return std::nullopt;
  json j = json::parse(text.substr(b, e - b + 1), nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

std::string format_seconds(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

}  // namespace

std::vector<std::string> parse_subtask_list(const std::string& text) {
  if (auto j = embedded_json(text, '[', ']'); j && j->is_array()) {
    std::vector<std::string> out;
    for (const auto& item : *j) {
      if (!item.is_string()) {
        out.clear();
        break;
      }
      if (!blank(item.get<std::string>())) out.push_back(trim(item.get<std::string>()));
    }
    if (!out.empty()) return out;
  }
  std::vector<std::string> out;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    std::string s = trim(line);
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
      out.push_back(trim(std::string_view(s).substr(i + 1)));
    } else if (i == 0 && !s.empty() && (s[0] == '-' || s[0] == '*')) {
      out.push_back(trim(std::string_view(s).substr(1)));
    }
    if (!out.empty() && out.back().empty()) out.pop_back();
  }
  if (out.empty()) throw ResponseParseError("no subtask list found in reply");
  return out;
}

store::SubtaskPlan decompose_task(const std::string& trajectory_id,
                                  const std::string& task_instruction,
                                  endpoint::ChatEndpoint& assist) {
  endpoint::ChatRequest req;
  req.messages.push_back(
      {"user",
       "Break the following robot manipulation task into a short ordered list of subtasks. "
       "Reply with a JSON array of strings, one per subtask.\nTask: " +
           task_instruction,
       {}});
  const auto reply = assist.complete(req);
  return store::SubtaskPlan{trajectory_id, parse_subtask_list(reply.text),
                            store::PlanProvenance::ModelDecomposed};
}

store::SubtaskPlan edit_subtask(store::SubtaskPlan plan, std::size_t index, std::string text) {
  if (index >= plan.subtasks.size()) {
    throw SubtaskIndexOutOfRange("subtask " + std::to_string(index) + " of " +
                                 std::to_string(plan.subtasks.size()));
  }
  if (blank(text)) throw InvalidArgument("subtask text is empty");
  plan.subtasks[index] = trim(text);
  plan.provenance = store::PlanProvenance::ManuallyEdited;
  return plan;
}

Stage3Drafts parse_stage3_response(const std::string& text) {
  const auto j = embedded_json(text, '{', '}');
  if (!j || !j->is_object()) throw ResponseParseError("reply contains no JSON object");
  auto field = [&](const char* key) {
    if (!j->contains(key) || !(*j)[key].is_string() || blank((*j)[key].get<std::string>())) {
      throw ResponseParseError(std::string("reply is missing ") + key);
    }
    return trim((*j)[key].get<std::string>());
  };
  Stage3Drafts d;
  d.failure_reason = field("failure_reason");
  d.high_level_avoidance = field("high_level_avoidance");
  d.high_level_correction = field("high_level_correction");
  return d;
}

AnnotationPipeline::AnnotationPipeline(const store::TrajectoryStore& store, Clock clock)
    : store_(store), clock_(std::move(clock)) {}

AnnotationRecord AnnotationPipeline::touched(AnnotationRecord record,
                                             const std::string& annotator_id) const {
  const std::string now = format_utc(clock_());
  if (record.created_at.empty()) record.created_at = now;
  record.updated_at = now;
  record.annotator_id = annotator_id;
  return record;
}

symbols::FrameDims AnnotationPipeline::frame_dims(const std::string& id, int frame_index) const {
  if (frame_index < 0 || static_cast<std::size_t>(frame_index) >= store_.frame_count(id)) {
    throw FrameMismatch("frame " + std::to_string(frame_index) + " does not exist in " + id);
  }
  const Image img = store_.frame_image(id, frame_index);
  return {img.width, img.height};
}

AnnotationRecord AnnotationPipeline::record_stage1(const std::optional<AnnotationRecord>& existing,
                                                   const std::string& trajectory_id,
                                                   const Stage1Input& in,
                                                   const std::string& annotator_id) const {
  if (existing) {
    if (existing->stage == Stage::Finalized) throw ImmutableError(trajectory_id + " is finalized");
    if (existing->stage != Stage::Stage1Done) {
      throw StageOrderError(trajectory_id + " is past stage 1 (" +
                            std::string(to_token(existing->stage)) + ")");
    }
  }
  const auto meta = store_.get(trajectory_id);
  const auto plan = store_.subtask_plan(trajectory_id);
  if (!plan) throw MissingSubtaskPlan(trajectory_id + " has no subtask plan");

  AnnotationRecord r = existing.value_or(AnnotationRecord{});
  r.trajectory_id = trajectory_id;
  r.subtask_plan = *plan;
  r.stage = Stage::Stage1Done;
  r.guidance = {};
  r.diagnosis = {};
  r.diagnosis.success = in.success;

  if (in.success) {
    if (in.keyframe_timestamp_s || in.failure_subtask_index || in.failure_type) {
      throw SuccessContradiction("successful trajectory given failure fields");
    }
    return touched(std::move(r), annotator_id);
  }

  if (!in.keyframe_timestamp_s || !in.failure_subtask_index || !in.failure_type) {
    throw InvalidArgument("failed trajectory needs keyframe, subtask index and failure type");
  }
  if (*in.failure_subtask_index < 0 ||
      *in.failure_subtask_index >= static_cast<int>(plan->subtasks.size())) {
    throw SubtaskIndexOutOfRange("subtask " + std::to_string(*in.failure_subtask_index) +
                                 " of " + std::to_string(plan->subtasks.size()));
  }
  const auto grid = store_.sample_frames(trajectory_id);
  const auto hit = std::find_if(grid.begin(), grid.end(), [&](const store::FrameRef& f) {
    return std::abs(f.timestamp_s - *in.keyframe_timestamp_s) < 1e-6;
  });
  if (hit == grid.end()) {
    throw KeyframeNotInSampleList("t=" + format_seconds(*in.keyframe_timestamp_s) +
                                  " s is not a sampled frame of " + trajectory_id);
  }
  store::FrameRef key = *hit;
  key.origin = store::FrameOrigin::Keyframe;
  r.diagnosis.failure_keyframe = key;
  r.diagnosis.failure_subtask_index = in.failure_subtask_index;
  r.diagnosis.failure_type = in.failure_type;
  return touched(std::move(r), annotator_id);
}

AnnotationRecord AnnotationPipeline::record_stage2(const AnnotationRecord& record,
                                                   const Stage2Input& in,
                                                   const std::string& annotator_id) const {
  if (record.stage == Stage::Finalized) throw ImmutableError(record.trajectory_id + " is finalized");
  if (record.stage != Stage::Stage1Done && record.stage != Stage::Stage2Done) {
    throw StageOrderError(record.trajectory_id + " is not ready for stage 2 (" +
                          std::string(to_token(record.stage)) + ")");
  }
  AnnotationRecord r = record;
  r.guidance = {};
  r.guidance.low_level_avoidance = in.low_level_avoidance;
  r.guidance.low_level_correction = in.low_level_correction;
  r.guidance.avoidance_symbols = in.avoidance_symbols;
  r.guidance.correction_symbols = in.correction_symbols;
  r.stage = Stage::Stage2Done;

  if (record.diagnosis.success) {
    if (!r.guidance.empty()) throw SuccessContradiction("successful trajectory given guidance");
    return touched(std::move(r), annotator_id);
  }

  for (const auto& c : in.low_level_avoidance) check_command(c);
  for (const auto& c : in.low_level_correction) check_command(c);
  const int key = record.diagnosis.failure_keyframe->frame_index;
  const auto& id = record.trajectory_id;

  if (in.avoidance_symbols) {
    const auto& s = *in.avoidance_symbols;
    if (s.purpose != symbols::SetPurpose::Avoidance) {
      throw InvalidArgument("avoidance symbols must have purpose avoidance");
    }
    if (s.frame_index != key) {
      throw FrameMismatch("avoidance symbols are on frame " + std::to_string(s.frame_index) +
                          ", failure keyframe is " + std::to_string(key));
    }
    symbols::require_valid(s, frame_dims(id, s.frame_index));
    if (!arms_match(in.low_level_avoidance, s)) {
      throw ArmMismatch("avoidance command arm has no matching avoidance symbol");
    }
  }
  if (in.correction_symbols) {
    const auto& s = *in.correction_symbols;
    if (s.purpose != symbols::SetPurpose::Correction) {
      throw InvalidArgument("correction symbols must have purpose correction");
    }
    if (s.frame_index < key) {
      throw FrameMismatch("correction symbols are on frame " + std::to_string(s.frame_index) +
                          ", before the failure keyframe " + std::to_string(key));
    }
    symbols::require_valid(s, frame_dims(id, s.frame_index));
    if (!arms_match(in.low_level_correction, s)) {
      throw ArmMismatch("correction command arm has no matching correction symbol");
    }
  }
  return touched(std::move(r), annotator_id);
}

endpoint::ChatRequest AnnotationPipeline::stage3_request(const AnnotationRecord& r) const {
  const auto meta = store_.get(r.trajectory_id);
  const auto& d = r.diagnosis;
  const auto& g = r.guidance;
  if (d.success || !d.failure_keyframe) {
    throw NotAFailure(r.trajectory_id + " has no failure to explain");
  }
  std::ostringstream text;
  text << "A robot manipulation attempt failed. Annotated information follows.\n";
  text << "Task: " << meta.task_instruction << "\n";
  text << "Subtasks:\n";
  for (std::size_t i = 0; i < r.subtask_plan.subtasks.size(); ++i) {
    text << "  " << i + 1 << ". " << r.subtask_plan.subtasks[i] << "\n";
  }
  const int failed = *d.failure_subtask_index;
  text << "Failed subtask: " << failed + 1 << ". " << r.subtask_plan.subtasks[failed] << "\n";
  text << "Failure type: " << display_name(*d.failure_type) << "\n";
  text << "Failure keyframe: " << format_seconds(d.failure_keyframe->timestamp_s) << " s\n";
  if (!g.low_level_avoidance.empty()) {
    text << "Low-level avoidance guidance: " << render_commands(g.low_level_avoidance) << "\n";
  }
  if (!g.low_level_correction.empty()) {
    text << "Low-level correction guidance: " << render_commands(g.low_level_correction) << "\n";
  }
  if (g.avoidance_symbols) {
    text << "Avoidance symbols:\n" << symbols::emit_symbol_code(*g.avoidance_symbols);
  }
  if (g.correction_symbols) {
    text << "Correction symbols:\n" << symbols::emit_symbol_code(*g.correction_symbols);
  }
  text << "\nImage 1 is the failure keyframe"
       << (g.avoidance_symbols ? " with the avoidance symbols drawn on it" : "") << ".";
  if (g.correction_symbols) text << " Image 2 shows the correction symbols.";
  text << "\nArrow colors give the motion axis: red is forward/backward, green is left/right, "
          "blue is up/down.\n"
          "Reply with a JSON object with three string fields: \"failure_reason\" (why the "
          "failure happens), \"high_level_avoidance\" (how the robot should act to avoid it) and "
          "\"high_level_correction\" (how the robot should recover from it).";

  endpoint::ChatMessage msg;
  msg.text = text.str();
  const Image key = store_.frame_image(r.trajectory_id, d.failure_keyframe->frame_index);
  msg.images.push_back(
      {"image/png", encode_png(g.avoidance_symbols ? symbols::render_overlay(key, *g.avoidance_symbols) : key)});
  if (g.correction_symbols) {
    const Image frame = store_.frame_image(r.trajectory_id, g.correction_symbols->frame_index);
    msg.images.push_back({"image/png", encode_png(symbols::render_overlay(frame, *g.correction_symbols))});
  }
  endpoint::ChatRequest req;
  req.messages.push_back(std::move(msg));
  return req;
}

AnnotationRecord AnnotationPipeline::vlm_assist_stage3(const AnnotationRecord& record,
                                                       endpoint::ChatEndpoint& assist) const {
  if (record.stage == Stage::Finalized) throw ImmutableError(record.trajectory_id + " is finalized");
  if (record.stage != Stage::Stage2Done && record.stage != Stage::Stage3Draft) {
    throw StageOrderError(record.trajectory_id + " is not ready for stage 3 (" +
                          std::string(to_token(record.stage)) + ")");
  }
  AnnotationRecord r = record;
  r.stage = Stage::Stage3Draft;
  if (record.diagnosis.success) return touched(std::move(r), record.annotator_id);

  const auto reply = assist.complete(stage3_request(record));
  const auto drafts = parse_stage3_response(reply.text);
  r.diagnosis.failure_reason = drafts.failure_reason;
  r.guidance.high_level_avoidance = drafts.high_level_avoidance;
  r.guidance.high_level_correction = drafts.high_level_correction;
  return touched(std::move(r), record.annotator_id);
}

AnnotationRecord AnnotationPipeline::finalize(const AnnotationRecord& record,
                                              const EditedTexts& edits,
                                              const std::string& annotator_id) const {
  if (record.stage == Stage::Finalized) throw ImmutableError(record.trajectory_id + " is finalized");
  if (record.stage != Stage::Stage3Draft) {
    throw StageOrderError(record.trajectory_id + " has no stage-3 draft to finalize");
  }
  AnnotationRecord r = record;
  if (r.diagnosis.success) {
    if (edits.failure_reason || edits.high_level_avoidance || edits.high_level_correction) {
      throw SuccessContradiction("successful trajectory given failure texts");
    }
  } else {
    if (edits.failure_reason) r.diagnosis.failure_reason = trim(*edits.failure_reason);
    if (edits.high_level_avoidance) r.guidance.high_level_avoidance = trim(*edits.high_level_avoidance);
    if (edits.high_level_correction) r.guidance.high_level_correction = trim(*edits.high_level_correction);
  }
  r.stage = Stage::Finalized;
  const auto issues = problems(r);
  if (!issues.empty()) {
    std::string msg = record.trajectory_id + " cannot be finalized:";
    for (const auto& p : issues) msg += " " + p + ";";
    throw IncompleteAnnotation(msg);
  }
  return touched(std::move(r), annotator_id);
}

std::vector<std::string> AnnotationPipeline::problems(const AnnotationRecord& r) const {
  auto out = consistency_problems(r);
  if (!store_.contains(r.trajectory_id)) {
    out.push_back("trajectory " + r.trajectory_id + " is not in the store");
    return out;
  }
  if (const auto& key = r.diagnosis.failure_keyframe) {
    const auto grid = store_.sample_frames(r.trajectory_id);
    const bool on_grid = std::any_of(grid.begin(), grid.end(), [&](const store::FrameRef& f) {
      return f.frame_index == key->frame_index && std::abs(f.timestamp_s - key->timestamp_s) < 1e-6;
    });
    if (!on_grid) out.push_back("failure keyframe is not a sampled frame");
  }
  for (const auto* set : {&r.guidance.avoidance_symbols, &r.guidance.correction_symbols}) {
    if (!*set) continue;
    try {
      if (symbols::has_errors(symbols::validate_symbols(**set, frame_dims(r.trajectory_id, (*set)->frame_index)))) {
        out.push_back(std::string(symbols::to_token((*set)->purpose)) + " symbols are invalid");
      }
    } catch (const FrameMismatch& e) {
      out.push_back(e.what());
    }
  }
  return out;
}

}  // namespace symguide::annotation
