#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string_view>
#include <vector>

namespace symguide::symbols {

enum class SymbolKind {
  StraightArrow,
  SemiCircularArrow,
  DualCrosshairs,
  Crosshair,
  GripperStateLabel,
  ProhibitionIcon,
  RewindIcon,
};

inline constexpr std::array<SymbolKind, 7> kAllKinds = {
    SymbolKind::StraightArrow,     SymbolKind::SemiCircularArrow,
    SymbolKind::DualCrosshairs,    SymbolKind::Crosshair,
    SymbolKind::GripperStateLabel, SymbolKind::ProhibitionIcon,
    SymbolKind::RewindIcon,
};

enum class SymbolCategory { Motion, SpatialRelation, State };

constexpr SymbolCategory category_of(SymbolKind kind) {
  switch (kind) {
    case SymbolKind::StraightArrow:
    case SymbolKind::SemiCircularArrow:
      return SymbolCategory::Motion;
    case SymbolKind::DualCrosshairs:
    case SymbolKind::Crosshair:
      return SymbolCategory::SpatialRelation;
    case SymbolKind::GripperStateLabel:
    case SymbolKind::ProhibitionIcon:
    case SymbolKind::RewindIcon:
      return SymbolCategory::State;
  }
  return SymbolCategory::State;
}

// Straight arrows encode the 3D axis of motion through color.
enum class AxisColor { Red, Green, Blue };
enum class MotionAxis { ForwardBackward, LeftRight, UpDown };

constexpr MotionAxis axis_of(AxisColor color) {
  switch (color) {
    case AxisColor::Red:
      return MotionAxis::ForwardBackward;
    case AxisColor::Green:
      return MotionAxis::LeftRight;
    case AxisColor::Blue:
      return MotionAxis::UpDown;
  }
  return MotionAxis::ForwardBackward;
}

constexpr AxisColor color_of(MotionAxis axis) {
  switch (axis) {
    case MotionAxis::ForwardBackward:
      return AxisColor::Red;
    case MotionAxis::LeftRight:
      return AxisColor::Green;
    case MotionAxis::UpDown:
      return AxisColor::Blue;
  }
  return AxisColor::Red;
}

enum class RotationDir { Clockwise, CounterClockwise };
enum class GripperState { On, Off };  // On = close, Off = open
enum class Arm { Left, Right, None };
enum class Magnitude { Slight, Significant };
enum class SetPurpose { Avoidance, Correction };

struct Point {
  int x = 0;
  int y = 0;
  friend constexpr auto operator<=>(const Point&, const Point&) = default;
};

struct SymbolInstance {
  SymbolKind kind = SymbolKind::Crosshair;
  int frame_index = 0;
  Point start;
  std::optional<Point> end;
  std::optional<AxisColor> color;
  std::optional<RotationDir> rotation_dir;
  std::optional<GripperState> gripper_state;
  Arm arm = Arm::None;
  std::optional<Magnitude> magnitude;

  friend bool operator==(const SymbolInstance&, const SymbolInstance&) = default;
};

struct SymbolSet {
  int frame_index = 0;
  SetPurpose purpose = SetPurpose::Avoidance;
  std::vector<SymbolInstance> symbols;

  friend bool operator==(const SymbolSet&, const SymbolSet&) = default;
};

// Inclusive pixel rectangle: (x0, y0) and (x1, y1) are both covered.
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  bool contains(Point p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  bool contains(const Rect& r) const {
    return r.x0 >= x0 && r.y0 >= y0 && r.x1 <= x1 && r.y1 <= y1;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

// Token spellings shared by the symbol code, JSON documents and logs.
std::string_view to_token(SymbolKind kind);
std::string_view to_token(AxisColor color);
std::string_view to_token(RotationDir dir);
std::string_view to_token(GripperState state);
std::string_view to_token(Arm arm);
std::string_view to_token(Magnitude magnitude);
std::string_view to_token(SetPurpose purpose);

std::optional<SymbolKind> kind_from_token(std::string_view token);
std::optional<AxisColor> color_from_token(std::string_view token);
std::optional<RotationDir> rotation_from_token(std::string_view token);
std::optional<GripperState> gripper_state_from_token(std::string_view token);
std::optional<Arm> arm_from_token(std::string_view token);
std::optional<Magnitude> magnitude_from_token(std::string_view token);
std::optional<SetPurpose> purpose_from_token(std::string_view token);

}  // namespace symguide::symbols
