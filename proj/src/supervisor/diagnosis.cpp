#include "symguide/supervisor/diagnosis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "symguide/common/errors.hpp"
#include "symguide/symbols/codec.hpp"

namespace symguide::supervisor {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Text after `label` up to the end of its line, or nullopt.
std::optional<std::string> labelled_line(const std::string& text, const std::string& lowered,
                                         const std::string& label) {
  const auto at = lowered.find(label);
  if (at == std::string::npos) return std::nullopt;
  const auto start = at + label.size();
  const auto end = text.find('\n', start);
  return text.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

bool reports_failure(const std::string& verdict) {
  static const char* kNegative[] = {"no failure",          "not fail",        "n't fail",
                                    "without failure",     "no sign of failure", "succeed",
                                    "success",             "proceeding correctly",
                                    "proceeds correctly",  "going well",      "on track",
                                    "no intervention"};
  const auto v = lower(verdict);
  for (const char* n : kNegative) {
    if (v.find(n) != std::string::npos) return false;
  }
  return v.find("fail") != std::string::npos;
}

// Guidance text: the "Low-level guidance:" section up to any symbol block.
std::string guidance_text(const std::string& text, const std::string& lowered) {
  auto start = lowered.find("low-level guidance:");
  if (start == std::string::npos) start = 0;
  auto end = std::min(lowered.find("```", start), lowered.find("frame=", start));
  return text.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

}  // namespace

DiagnosisResponse parse_cot_response(const std::string& text) {
  DiagnosisResponse d;
  d.cot_text = text;
  const auto lowered = lower(text);
  const auto verdict = labelled_line(text, lowered, "failure detection:");
  d.failed = reports_failure(verdict ? *verdict : text);
  if (!d.failed) return d;

  d.low_level_commands = annotation::find_commands(guidance_text(text, lowered));
  if (d.low_level_commands.empty()) {
    throw ResponseParseError("failure reported without a recognizable low-level command");
  }
  if (const auto code = symbols::extract_symbol_code(text)) {
    try {
      d.symbol_set = symbols::parse_symbol_code(*code);
    } catch (const Error& e) {
      throw ResponseParseError(std::string("malformed symbol code: ") + e.what());
    }
  }
  return d;
}

std::vector<double> select_history(const std::vector<double>& available, double now, double window_s,
                                   double fps) {
  std::vector<double> out;
  const double oldest = now - window_s;
  const auto steps = static_cast<long>(std::ceil(window_s * fps)) + 1;
  for (long k = 0; k < steps; ++k) {
    const double target = now - static_cast<double>(k) / fps;
    if (target <= oldest + 1e-9) break;
    const auto it = std::upper_bound(available.begin(), available.end(), target + 1e-9);
    if (it == available.begin()) break;
    const double t = *(it - 1);
    if (t <= oldest + 1e-9) break;
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::string diagnosis_prompt(const SupervisorConfig& config, std::size_t frame_count) {
  std::ostringstream os;
  os << "You are monitoring a robot performing the task \"" << config.task_instruction << "\". The "
     << frame_count << " images are head-camera frames from the last " << config.history_window_s
     << " seconds, oldest first. Decide whether the robot is failing. Answer in this format:\n"
     << "Failure detection: <whether the robot fails>\n"
     << "Failure localization: <when, during which subtask, and the failure type>\n"
     << "Low-level guidance: <corrective commands such as \"Move the left gripper to the right "
        "slightly\">\n"
     << "If the robot fails, end with the corrective visual symbols as a symbol-code block in "
        "```symbols fences, starting with a frame= header line. If it is not failing, reply "
        "\"The task is proceeding correctly.\"";
  return os.str();
}

endpoint::ChatRequest diagnosis_request(const SupervisorConfig& config, const std::vector<Image>& frames) {
  endpoint::ChatMessage msg;
  msg.text = diagnosis_prompt(config, frames.size());
  for (const auto& f : frames) msg.images.push_back({"image/png", encode_png(f)});
  endpoint::ChatRequest req;
  req.messages.push_back(std::move(msg));
  return req;
}

}  // namespace symguide::supervisor
