#include "symguide/symbols/types.hpp"

#include <utility>

namespace symguide::symbols {
namespace {

template <class E, std::size_t N>
using Table = std::array<std::pair<E, std::string_view>, N>;

constexpr Table<SymbolKind, 7> kKindTokens{{
    {SymbolKind::StraightArrow, "straight_arrow"},
    {SymbolKind::SemiCircularArrow, "semicircular_arrow"},
    {SymbolKind::DualCrosshairs, "dual_crosshairs"},
    {SymbolKind::Crosshair, "crosshair"},
    {SymbolKind::GripperStateLabel, "gripper_state"},
    {SymbolKind::ProhibitionIcon, "prohibition"},
    {SymbolKind::RewindIcon, "rewind"},
}};
constexpr Table<AxisColor, 3> kColorTokens{{
    {AxisColor::Red, "red"}, {AxisColor::Green, "green"}, {AxisColor::Blue, "blue"}}};
constexpr Table<RotationDir, 2> kRotationTokens{{
    {RotationDir::Clockwise, "clockwise"},
    {RotationDir::CounterClockwise, "counterclockwise"}}};
constexpr Table<GripperState, 2> kStateTokens{{
    {GripperState::On, "on"}, {GripperState::Off, "off"}}};
constexpr Table<Arm, 3> kArmTokens{{
    {Arm::Left, "left"}, {Arm::Right, "right"}, {Arm::None, "none"}}};
constexpr Table<Magnitude, 2> kMagnitudeTokens{{
    {Magnitude::Slight, "slight"}, {Magnitude::Significant, "significant"}}};
constexpr Table<SetPurpose, 2> kPurposeTokens{{
    {SetPurpose::Avoidance, "avoidance"}, {SetPurpose::Correction, "correction"}}};

template <class E, std::size_t N>
std::string_view lookup(const Table<E, N>& table, E value) {
  for (const auto& [e, token] : table) {
    if (e == value) return token;
  }
  return "?";
}

template <class E, std::size_t N>
std::optional<E> reverse(const Table<E, N>& table, std::string_view token) {
  for (const auto& [e, t] : table) {
    if (t == token) return e;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_token(SymbolKind kind) { return lookup(kKindTokens, kind); }
std::string_view to_token(AxisColor color) { return lookup(kColorTokens, color); }
std::string_view to_token(RotationDir dir) { return lookup(kRotationTokens, dir); }
std::string_view to_token(GripperState state) { return lookup(kStateTokens, state); }
std::string_view to_token(Arm arm) { return lookup(kArmTokens, arm); }
std::string_view to_token(Magnitude magnitude) { return lookup(kMagnitudeTokens, magnitude); }
std::string_view to_token(SetPurpose purpose) { return lookup(kPurposeTokens, purpose); }

std::optional<SymbolKind> kind_from_token(std::string_view t) { return reverse(kKindTokens, t); }
std::optional<AxisColor> color_from_token(std::string_view t) { return reverse(kColorTokens, t); }
std::optional<RotationDir> rotation_from_token(std::string_view t) {
  return reverse(kRotationTokens, t);
}
std::optional<GripperState> gripper_state_from_token(std::string_view t) {
  return reverse(kStateTokens, t);
}
std::optional<Arm> arm_from_token(std::string_view t) { return reverse(kArmTokens, t); }
std::optional<Magnitude> magnitude_from_token(std::string_view t) {
  return reverse(kMagnitudeTokens, t);
}
std::optional<SetPurpose> purpose_from_token(std::string_view t) {
  return reverse(kPurposeTokens, t);
}

}  // namespace symguide::symbols
