#include "symguide/annotation/commands.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "symguide/common/errors.hpp"

namespace symguide::annotation {

using symbols::Arm;
using symbols::Magnitude;
using symbols::RotationDir;

namespace {

std::string_view arm_word(Arm arm) { return arm == Arm::Left ? "left" : "right"; }

std::string_view direction_phrase(Direction d) {
  switch (d) {
    case Direction::Left: return "to the left";
    case Direction::Right: return "to the right";
    case Direction::Forward: return "forward";
    case Direction::Backward: return "backward";
    case Direction::Up: return "upward";
    case Direction::Down: return "downward";
  }
  return "";
}

std::string normalize(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  while (!out.empty() && (out.back() == '.' || out.back() == ';' || out.back() == ',' ||
                          out.back() == '!')) {
    out.pop_back();
  }
  return out;
}

const std::map<std::string, LowLevelCommand>& lookup() {
  static const auto table = [] {
    std::map<std::string, LowLevelCommand> t;
    for (Arm arm : {Arm::Left, Arm::Right}) {
      for (const auto& c : command_vocabulary(arm)) t.emplace(normalize(render_command(c)), c);
    }
    return t;
  }();
  return table;
}

}  // namespace

void check_command(const LowLevelCommand& c) {
  if (c.arm == Arm::None) throw InvalidArgument("command arm must be left or right");
  const bool move = c.verb == Verb::Move;
  const bool rotate = c.verb == Verb::Rotate;
  if (move != c.direction.has_value()) {
    throw InvalidArgument(move ? "move command needs a direction" : "direction only applies to move");
  }
  if (c.magnitude && !move) throw InvalidArgument("magnitude only applies to move");
  if (rotate != c.rotation.has_value()) {
    throw InvalidArgument(rotate ? "rotate command needs a rotation" : "rotation only applies to rotate");
  }
}

std::string render_command(const LowLevelCommand& c) {
  check_command(c);
  const std::string arm(arm_word(c.arm));
  switch (c.verb) {
    case Verb::Move: {
      std::string s = "Move the " + arm + " gripper " + std::string(direction_phrase(*c.direction));
      if (c.magnitude) s += *c.magnitude == Magnitude::Slight ? " slightly" : " significantly";
      return s;
    }
    case Verb::Rotate:
      return "Rotate the " + arm + " gripper " +
             (*c.rotation == RotationDir::Clockwise ? "clockwise" : "counterclockwise");
    case Verb::OpenGripper: return "Open the " + arm + " gripper";
    case Verb::CloseGripper: return "Close the " + arm + " gripper";
    case Verb::HoldStill: return "Hold the " + arm + " arm still";
    case Verb::ResetToInitial: return "Move the " + arm + " arm back to its initial pose";
  }
  return {};
}

std::string render_commands(const std::vector<LowLevelCommand>& commands) {
  std::string out;
  for (const auto& c : commands) {
    if (!out.empty()) out += "; ";
    out += render_command(c);
  }
  return out;
}

std::vector<LowLevelCommand> command_vocabulary(Arm arm) {
  if (arm == Arm::None) throw InvalidArgument("command arm must be left or right");
  std::vector<LowLevelCommand> v;
  for (Direction d : kAllDirections) {
    v.push_back({arm, Verb::Move, d, std::nullopt, std::nullopt});
    v.push_back({arm, Verb::Move, d, std::nullopt, Magnitude::Slight});
    v.push_back({arm, Verb::Move, d, std::nullopt, Magnitude::Significant});
  }
  v.push_back({arm, Verb::Rotate, std::nullopt, RotationDir::Clockwise, std::nullopt});
  v.push_back({arm, Verb::Rotate, std::nullopt, RotationDir::CounterClockwise, std::nullopt});
  v.push_back({arm, Verb::OpenGripper, {}, {}, {}});
  v.push_back({arm, Verb::CloseGripper, {}, {}, {}});
  v.push_back({arm, Verb::HoldStill, {}, {}, {}});
  v.push_back({arm, Verb::ResetToInitial, {}, {}, {}});
  return v;
}

std::optional<LowLevelCommand> parse_command(std::string_view text) {
  const auto& table = lookup();
  const auto it = table.find(normalize(text));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::vector<LowLevelCommand> parse_commands(std::string_view text) {
  std::vector<LowLevelCommand> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of(";.\n", start);
    if (end == std::string_view::npos) end = text.size();
    const auto piece = text.substr(start, end - start);
    if (!normalize(piece).empty()) {
      auto c = parse_command(piece);
      if (!c) throw InvalidArgument("not a low-level command: \"" + std::string(piece) + "\"");
      out.push_back(*c);
    }
    start = end + 1;
  }
  return out;
}

std::vector<LowLevelCommand> find_commands(std::string_view text) {
  const std::string hay = normalize(text);
  std::vector<std::pair<std::size_t, std::size_t>> taken;  // [begin, end)
  std::vector<std::pair<std::size_t, LowLevelCommand>> hits;

  // Longest phrases first so "... slightly" is not also counted as the bare move.
  std::vector<std::pair<std::string, LowLevelCommand>> phrases(lookup().begin(), lookup().end());
  std::stable_sort(phrases.begin(), phrases.end(),
                   [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  for (const auto& [phrase, cmd] : phrases) {
    for (std::size_t pos = hay.find(phrase); pos != std::string::npos;
         pos = hay.find(phrase, pos + 1)) {
      const std::size_t end = pos + phrase.size();
      const bool word_end = end == hay.size() || !std::isalpha(static_cast<unsigned char>(hay[end]));
      const bool overlaps = std::any_of(taken.begin(), taken.end(), [&](const auto& r) {
        return pos < r.second && r.first < end;
      });
      if (word_end && !overlaps) {
        taken.emplace_back(pos, end);
        hits.emplace_back(pos, cmd);
      }
    }
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<LowLevelCommand> out;
  for (auto& h : hits) out.push_back(h.second);
  return out;
}

}  // namespace symguide::annotation
