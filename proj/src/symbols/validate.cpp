#include "symguide/symbols/validate.hpp"

#include <map>
#include <set>
#include <string>

namespace symguide::symbols {
namespace {

struct FieldRule {
  bool end = false;
  bool color = false;
  bool rotation = false;
  bool gripper = false;
  bool magnitude = false;
};

// Which optional fields each kind requires; magnitude is the only field that
// is allowed but never required.
FieldRule required_fields(SymbolKind kind) {
  switch (kind) {
    case SymbolKind::StraightArrow:
      return {.end = true, .color = true};
    case SymbolKind::SemiCircularArrow:
      return {.rotation = true};
    case SymbolKind::DualCrosshairs:
      return {.end = true};
    case SymbolKind::GripperStateLabel:
      return {.gripper = true};
    default:
      return {};
  }
}

std::string where(std::size_t i, SymbolKind kind) {
  return "symbol " + std::to_string(i) + " (" + std::string(to_token(kind)) + ")";
}

void check_field(std::vector<Violation>& out, std::size_t i, SymbolKind kind,
                 bool present, bool required, bool allowed, const char* name) {
  if (required && !present) {
    out.push_back({ViolationCode::MissingField, Severity::Error, i,
                   where(i, kind) + ": missing required field '" + name + "'"});
  } else if (present && !required && !allowed) {
    out.push_back({ViolationCode::UnexpectedField, Severity::Error, i,
                   where(i, kind) + ": field '" + name + "' not allowed for this kind"});
  }
}

void check_point(std::vector<Violation>& out, std::size_t i, SymbolKind kind, Point p,
                 const char* name, const std::optional<FrameDims>& dims) {
  const bool negative = p.x < 0 || p.y < 0;
  const bool beyond = dims && (p.x >= dims->width || p.y >= dims->height);
  if (negative || beyond) {
    std::string msg = where(i, kind) + ": " + name + " (" + std::to_string(p.x) + "," +
                      std::to_string(p.y) + ") outside frame";
    if (dims) msg += " " + std::to_string(dims->width) + "x" + std::to_string(dims->height);
    out.push_back({ViolationCode::CoordinateOutOfBounds, Severity::Error, i, std::move(msg)});
  }
}

}  // namespace

std::string_view to_token(ViolationCode code) {
  switch (code) {
    case ViolationCode::MissingField:
      return "MissingField";
    case ViolationCode::UnexpectedField:
      return "UnexpectedField";
    case ViolationCode::CoordinateOutOfBounds:
      return "CoordinateOutOfBounds";
    case ViolationCode::DegenerateArrow:
      return "DegenerateArrow";
    case ViolationCode::FrameIndexMismatch:
      return "FrameIndexMismatch";
    case ViolationCode::NegativeFrameIndex:
      return "NegativeFrameIndex";
    case ViolationCode::DuplicateStateSymbol:
      return "DuplicateStateSymbol";
    case ViolationCode::DuplicateAxisColor:
      return "DuplicateAxisColor";
  }
  return "?";
}

std::vector<Violation> validate_symbols(const SymbolSet& set, std::optional<FrameDims> dims) {
  std::vector<Violation> out;
  if (set.frame_index < 0) {
    out.push_back({ViolationCode::NegativeFrameIndex, Severity::Error, std::nullopt,
                   "frame index " + std::to_string(set.frame_index) + " is negative"});
  }

  std::set<std::pair<SymbolKind, Arm>> state_symbols;
  std::map<AxisColor, int> arrow_colors;

  for (std::size_t i = 0; i < set.symbols.size(); ++i) {
    const SymbolInstance& s = set.symbols[i];
    const FieldRule req = required_fields(s.kind);
    const bool is_arrow = s.kind == SymbolKind::StraightArrow;

    check_field(out, i, s.kind, s.end.has_value(), req.end, false, "end");
    check_field(out, i, s.kind, s.color.has_value(), req.color, false, "color");
    check_field(out, i, s.kind, s.rotation_dir.has_value(), req.rotation, false, "rotation");
    check_field(out, i, s.kind, s.gripper_state.has_value(), req.gripper, false, "state");
    check_field(out, i, s.kind, s.magnitude.has_value(), false, is_arrow, "mag");

    if (s.frame_index != set.frame_index) {
      out.push_back({ViolationCode::FrameIndexMismatch, Severity::Error, i,
                     where(i, s.kind) + ": frame " + std::to_string(s.frame_index) +
                         " differs from set frame " + std::to_string(set.frame_index)});
    }

    check_point(out, i, s.kind, s.start, "start", dims);
    if (s.end) check_point(out, i, s.kind, *s.end, "end", dims);

    if (is_arrow && s.end && *s.end == s.start) {
      out.push_back({ViolationCode::DegenerateArrow, Severity::Error, i,
                     where(i, s.kind) + ": start equals end"});
    }

    if (s.kind == SymbolKind::GripperStateLabel || s.kind == SymbolKind::ProhibitionIcon) {
      if (!state_symbols.insert({s.kind, s.arm}).second) {
        out.push_back({ViolationCode::DuplicateStateSymbol, Severity::Error, i,
                       where(i, s.kind) + ": second " + std::string(to_token(s.kind)) +
                           " for arm " + std::string(to_token(s.arm))});
      }
    }

    if (is_arrow && s.color && ++arrow_colors[*s.color] == 2) {
      out.push_back({ViolationCode::DuplicateAxisColor, Severity::Warning, i,
                     where(i, s.kind) + ": repeated " + std::string(to_token(*s.color)) +
                         " arrow"});
    }
  }
  return out;
}

std::vector<Violation> validate_symbols(const SymbolSet& set, int frame_width,
                                        int frame_height) {
  if (frame_width <= 0 || frame_height <= 0) {
    throw InvalidArgument("frame dimensions must be positive");
  }
  return validate_symbols(set, FrameDims{frame_width, frame_height});
}

bool has_errors(const std::vector<Violation>& violations) {
  for (const auto& v : violations) {
    if (v.severity == Severity::Error) return true;
  }
  return false;
}

namespace {
std::string summarize(const std::vector<Violation>& violations) {
  std::string msg = "invalid symbol set";
  for (const auto& v : violations) {
    if (v.severity != Severity::Error) continue;
    msg += "; ";
    msg += to_token(v.code);
    msg += ": ";
    msg += v.message;
  }
  return msg;
}
}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(summarize(violations)), violations_(std::move(violations)) {}

void require_valid(const SymbolSet& set, std::optional<FrameDims> dims) {
  auto violations = validate_symbols(set, dims);
  if (has_errors(violations)) throw ValidationError(std::move(violations));
}

}  // namespace symguide::symbols
