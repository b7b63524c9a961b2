#include "symguide/supervisor/types.hpp"

#include <fstream>

#include "symguide/common/errors.hpp"
#include "symguide/common/hashing.hpp"
#include "symguide/symbols/codec.hpp"

namespace symguide::supervisor {

using nlohmann::json;

std::string_view to_token(CorrectionMode mode) { return mode == CorrectionMode::Vsf ? "vsf" : "pmc"; }

std::optional<CorrectionMode> correction_mode_from_token(std::string_view token) {
  if (token == "vsf") return CorrectionMode::Vsf;
  if (token == "pmc") return CorrectionMode::Pmc;
  return std::nullopt;
}

std::string_view to_token(WristMask mask) { return mask == WristMask::Keep ? "keep" : "zero_all"; }

void check_config(const SupervisorConfig& c) {
  if (c.query_interval_chunks < 1) throw InvalidArgument("query_interval_chunks must be >= 1");
  if (!(c.history_window_s > 0)) throw InvalidArgument("history_window_s must be > 0");
  if (!(c.history_fps > 0)) throw InvalidArgument("history_fps must be > 0");
}

json to_json(const SupervisorConfig& c) {
  json j{{"query_interval_chunks", c.query_interval_chunks},
         {"history_window_s", c.history_window_s},
         {"history_fps", c.history_fps},
         {"mode", to_token(c.mode)},
         {"task_instruction", c.task_instruction}};
  j["endpoint"] = c.endpoint ? endpoint::to_json(*c.endpoint) : json(nullptr);
  return j;
}

SupervisorConfig supervisor_config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("supervisor config must be an object");
  SupervisorConfig c;
  try {
    c.query_interval_chunks = j.value("query_interval_chunks", c.query_interval_chunks);
    c.history_window_s = j.value("history_window_s", c.history_window_s);
    c.history_fps = j.value("history_fps", c.history_fps);
    c.task_instruction = j.value("task_instruction", "");
    const auto mode = correction_mode_from_token(j.value("mode", std::string("vsf")));
    if (!mode) throw InvalidArgument("mode must be \"vsf\" or \"pmc\"");
    c.mode = *mode;
    if (j.contains("endpoint") && !j["endpoint"].is_null()) {
      c.endpoint = endpoint::endpoint_config_from_json(j["endpoint"]);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("supervisor config: ") + e.what());
  }
  check_config(c);
  return c;
}

SupervisorConfig load_supervisor_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  const auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw InvalidArgument(path.string() + " is not valid JSON");
  return supervisor_config_from_json(j);
}

void check_command(const CorrectionCommand& c) {
  if (c.mode == CorrectionMode::Vsf) {
    if (!c.mask || c.pmc_target || c.hold_still_fallback) {
      throw InvalidArgument("a VSF command carries a mask and no PMC target");
    }
    return;
  }
  if (c.mask) throw InvalidArgument("a PMC command carries no mask");
  if (c.hold_still_fallback == c.pmc_target.has_value()) {
    throw InvalidArgument("a PMC command carries either a target or the hold-still fallback");
  }
}

json to_json(const MaskSpec& m) {
  return json{{"head_roi", {m.head_roi.x0, m.head_roi.y0, m.head_roi.x1, m.head_roi.y1}},
              {"left_wrist", to_token(m.left_wrist)},
              {"right_wrist", to_token(m.right_wrist)}};
}

json to_json(const PmcTarget& t) {
  return json{{"arm", symbols::to_token(t.arm)},
              {"point", {t.point.x, t.point.y}},
              {"grasp_requested", t.grasp_requested}};
}

json to_json(const CorrectionCommand& c) {
  json j{{"mode", to_token(c.mode)},
         {"textual_prompt", c.textual_prompt},
         {"hold_still_fallback", c.hold_still_fallback}};
  if (!c.overlay_frame.empty()) {
    j["overlay"] = {{"width", c.overlay_frame.width},
                    {"height", c.overlay_frame.height},
                    {"png_sha256", sha256_hex(encode_png(c.overlay_frame))}};
  } else {
    j["overlay"] = nullptr;
  }
  j["mask"] = c.mask ? to_json(*c.mask) : json(nullptr);
  j["pmc_target"] = c.pmc_target ? to_json(*c.pmc_target) : json(nullptr);
  return j;
}

json to_json(const DiagnosisResponse& d) {
  json commands = json::array();
  for (const auto& c : d.low_level_commands) commands.push_back(annotation::render_command(c));
  json j{{"failed", d.failed}, {"low_level_commands", commands}};
  j["symbol_code"] = d.symbol_set ? json(symbols::emit_symbol_code(*d.symbol_set)) : json(nullptr);
  return j;
}

}  // namespace symguide::supervisor
