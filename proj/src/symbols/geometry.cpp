#include "symguide/symbols/geometry.hpp"

#include <algorithm>
#include <string>

#include "symguide/common/errors.hpp"

namespace symguide::symbols {
namespace {

Rect point_box(Point p) {
  return {std::max(0, p.x - kGlyphRadius), std::max(0, p.y - kGlyphRadius),
          std::max(0, p.x + kGlyphRadius), std::max(0, p.y + kGlyphRadius)};
}

}  // namespace

Rect rect_union(const Rect& a, const Rect& b) {
  return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1),
          std::max(a.y1, b.y1)};
}

Rect symbol_footprint(const SymbolInstance& symbol) {
  Rect r = point_box(symbol.start);
  if (symbol.end) r = rect_union(r, point_box(*symbol.end));
  return r;
}

Rect symbol_bbox(const SymbolSet& set) {
  if (set.symbols.empty()) throw EmptySetError("bounding box of an empty symbol set");
  Rect r = symbol_footprint(set.symbols.front());
  for (std::size_t i = 1; i < set.symbols.size(); ++i) {
    r = rect_union(r, symbol_footprint(set.symbols[i]));
  }
  return r;
}

bool has_target(SymbolKind kind) {
  return kind == SymbolKind::StraightArrow || kind == SymbolKind::Crosshair ||
         kind == SymbolKind::DualCrosshairs;
}

Point target_point(const SymbolInstance& symbol) {
  switch (symbol.kind) {
    case SymbolKind::Crosshair:
      return symbol.start;
    case SymbolKind::StraightArrow:
    case SymbolKind::DualCrosshairs:
      if (!symbol.end) throw NoTargetError(std::string(to_token(symbol.kind)) + " without end");
      return *symbol.end;
    default:
      throw NoTargetError(std::string(to_token(symbol.kind)) + " has no target point");
  }
}

}  // namespace symguide::symbols
