#pragma once

#include "symguide/symbols/types.hpp"

namespace symguide::symbols {

// Every glyph is drawn within this distance (per axis) of its anchor points.
inline constexpr int kGlyphRadius = 24;
inline constexpr int kArrowheadLength = 12;

// Union of the glyph boxes around start (and end), clamped at 0 on the low
// side. Not clamped on the high side: frame dims are not known here.
Rect symbol_footprint(const SymbolInstance& symbol);

// Throws EmptySetError for an empty set.
Rect symbol_bbox(const SymbolSet& set);

Rect rect_union(const Rect& a, const Rect& b);

// StraightArrow -> end, Crosshair -> start, DualCrosshairs -> end.
// Throws NoTargetError for the other kinds.
Point target_point(const SymbolInstance& symbol);

bool has_target(SymbolKind kind);

}  // namespace symguide::symbols
