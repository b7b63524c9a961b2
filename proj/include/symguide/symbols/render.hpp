#pragma once

#include <cstdint>

#include "symguide/symbols/image.hpp"
#include "symguide/symbols/types.hpp"

namespace symguide::symbols {

struct RenderStyle {
  // Axis colors are (primary, secondary, secondary) and permutations thereof.
  std::uint8_t primary = 255;
  std::uint8_t secondary = 0;
  int line_width = 3;
  int dash_on = 6;
  int dash_off = 4;
  Rgb crosshair{255, 255, 0};
  Rgb rotation{255, 0, 255};
  Rgb badge_on{0, 160, 0};
  Rgb badge_off{96, 96, 96};
  Rgb badge_text{255, 255, 255};
  Rgb prohibition{255, 0, 0};
  Rgb rewind{255, 128, 0};

  Rgb axis_rgb(AxisColor color) const;
};

// Glyph geometry shared with drawing front-ends.
struct GlyphMetrics {
  static constexpr int crosshair_ring = 12;
  static constexpr int crosshair_arm = 20;
  static constexpr int rotation_radius = 14;
  static constexpr int rotation_head = 8;
  static constexpr int badge_half_width = 20;
  static constexpr int badge_half_height = 10;
  static constexpr int prohibition_radius = 18;
  static constexpr int rewind_half = 16;
};

// Pure: returns a new image, input untouched. Pixels outside the symbols'
// footprints are byte-identical to the input. Throws ValidationError when the
// set is invalid for the frame and ImageFormatError for a malformed frame.
Image render_overlay(const Image& frame, const SymbolSet& set, const RenderStyle& style = {});

}  // namespace symguide::symbols
