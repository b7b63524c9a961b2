#pragma once

#include <string>
#include <string_view>

#include "symguide/symbols/types.hpp"
#include "symguide/symbols/validate.hpp"

namespace symguide::eval {

enum class SymbolMatchReason { Match, ParseFail, KindMismatch, AttributeMismatch, PointError };

std::string_view to_token(SymbolMatchReason reason);

struct SymbolScore {
  bool match = false;
  SymbolMatchReason reason = SymbolMatchReason::ParseFail;
  double max_point_error = 0;  // pixels, over matched pairs
  double tolerance = 0;        // pixels
  std::string detail;
};

// Fraction of the frame diagonal a matched point may be off by.
inline constexpr double kPointTolerance = 0.10;

// Compares generated symbol code with the reference set. Symbols are paired
// within each kind by a minimum-cost assignment that first minimizes
// categorical mismatches (color, rotation, gripper state, arm) and then total
// point distance. A symbol-code block embedded in prose is accepted.
SymbolScore score_symbol_code(std::string_view generated, const symbols::SymbolSet& truth,
                              symbols::FrameDims dims);

}  // namespace symguide::eval
