#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "symguide/annotation/commands.hpp"
#include "symguide/endpoint/config.hpp"
#include "symguide/symbols/image.hpp"
#include "symguide/symbols/types.hpp"

namespace symguide::supervisor {

// VSF: overlay plus a region-of-interest mask on the policy's inputs.
// PMC: the guided arm is driven to a pixel target taken from the symbols.
enum class CorrectionMode { Vsf, Pmc };

std::string_view to_token(CorrectionMode mode);  // "vsf" / "pmc"
std::optional<CorrectionMode> correction_mode_from_token(std::string_view token);

struct SupervisorConfig {
  int query_interval_chunks = 6;
  double history_window_s = 5.0;
  double history_fps = 1.0;
  CorrectionMode mode = CorrectionMode::Vsf;
  std::string task_instruction;
  // Absent when the caller supplies the endpoint object directly.
  std::optional<endpoint::ModelEndpointConfig> endpoint;

  bool operator==(const SupervisorConfig&) const = default;
};

// Throws InvalidArgument when interval < 1, window <= 0 or fps <= 0.
void check_config(const SupervisorConfig& config);
nlohmann::json to_json(const SupervisorConfig& config);
SupervisorConfig supervisor_config_from_json(const nlohmann::json& j);
SupervisorConfig load_supervisor_config(const std::filesystem::path& path);

struct DiagnosisResponse {
  bool failed = false;
  std::string cot_text;
  std::vector<annotation::LowLevelCommand> low_level_commands;
  std::optional<symbols::SymbolSet> symbol_set;

  friend bool operator==(const DiagnosisResponse&, const DiagnosisResponse&) = default;
};

enum class WristMask { Keep, ZeroAll };
std::string_view to_token(WristMask mask);  // "keep" / "zero_all"

struct MaskSpec {
  symbols::Rect head_roi;
  WristMask left_wrist = WristMask::Keep;
  WristMask right_wrist = WristMask::Keep;

  friend bool operator==(const MaskSpec&, const MaskSpec&) = default;
};

struct PmcTarget {
  symbols::Arm arm = symbols::Arm::None;
  symbols::Point point;
  bool grasp_requested = false;

  friend bool operator==(const PmcTarget&, const PmcTarget&) = default;
};

// One camera snapshot; wrist views are optional.
struct ObservationFrames {
  Image head;
  std::optional<Image> left_wrist;
  std::optional<Image> right_wrist;

  friend bool operator==(const ObservationFrames&, const ObservationFrames&) = default;
};

struct CorrectionCommand {
  CorrectionMode mode = CorrectionMode::Vsf;
  Image overlay_frame;
  std::string textual_prompt;
  std::optional<MaskSpec> mask;          // VSF only
  std::optional<PmcTarget> pmc_target;   // PMC only
  // PMC with no targetable symbol: the prompt is a hold-still command and
  // there is no target.
  bool hold_still_fallback = false;
};

// Exactly one of mask / pmc_target, matching the mode, except for the PMC
// hold-still fallback which carries neither. Throws InvalidArgument.
void check_command(const CorrectionCommand& command);

nlohmann::json to_json(const MaskSpec& mask);
nlohmann::json to_json(const PmcTarget& target);
// The overlay is summarized by dims and SHA-256 of its PNG encoding.
nlohmann::json to_json(const CorrectionCommand& command);
nlohmann::json to_json(const DiagnosisResponse& response);

}  // namespace symguide::supervisor
