#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "symguide/symbols/types.hpp"

namespace symguide::annotation {

enum class Verb { Move, Rotate, OpenGripper, CloseGripper, HoldStill, ResetToInitial };
enum class Direction { Left, Right, Forward, Backward, Up, Down };

inline constexpr Direction kAllDirections[] = {Direction::Left,     Direction::Right,
                                               Direction::Forward,  Direction::Backward,
                                               Direction::Up,       Direction::Down};

// One step of low-level textual guidance. `direction` and `magnitude` only
// apply to Move, `rotation` only to Rotate; `arm` is Left or Right.
struct LowLevelCommand {
  symbols::Arm arm = symbols::Arm::Left;
  Verb verb = Verb::HoldStill;
  std::optional<Direction> direction;
  std::optional<symbols::RotationDir> rotation;
  std::optional<symbols::Magnitude> magnitude;

  friend bool operator==(const LowLevelCommand&, const LowLevelCommand&) = default;
};

// Throws InvalidArgument when a field is missing or present for the wrong verb.
void check_command(const LowLevelCommand& command);

// "Move the left gripper to the right slightly"
std::string render_command(const LowLevelCommand& command);

// Commands joined with "; ".
std::string render_commands(const std::vector<LowLevelCommand>& commands);

// Every renderable command for one arm (24 per arm), in a fixed order.
std::vector<LowLevelCommand> command_vocabulary(symbols::Arm arm);

// Exact match against the vocabulary, ignoring case, surrounding
// whitespace and trailing punctuation.
std::optional<LowLevelCommand> parse_command(std::string_view text);

// Splits on ';', '.' and newlines and parses every piece. Throws
// InvalidArgument naming the first piece outside the vocabulary.
std::vector<LowLevelCommand> parse_commands(std::string_view text);

// Scans free text for vocabulary sentences, in order of appearance. Longer
// phrasings win over their prefixes.
std::vector<LowLevelCommand> find_commands(std::string_view text);

}  // namespace symguide::annotation
