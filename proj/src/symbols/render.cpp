#include "symguide/symbols/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string_view>

#include "symguide/symbols/geometry.hpp"
#include "symguide/symbols/validate.hpp"

namespace symguide::symbols {
namespace {

struct Vec {
  double x;
  double y;
};

Vec to_vec(Point p) { return {static_cast<double>(p.x), static_cast<double>(p.y)}; }

double dist_to_segment(Vec p, Vec a, Vec b, double* t_out = nullptr) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  if (t_out) *t_out = t;
  const double cx = a.x + t * dx - p.x;
  const double cy = a.y + t * dy - p.y;
  return std::sqrt(cx * cx + cy * cy);
}

class Canvas {
 public:
  explicit Canvas(Image& image) : image_(image) {}

  template <class Pred>
  void fill_where(double x0, double y0, double x1, double y1, Rgb color, Pred inside) {
    const int ix0 = std::max(0, static_cast<int>(std::floor(x0)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(y0)));
    const int ix1 = std::min(image_.width - 1, static_cast<int>(std::ceil(x1)));
    const int iy1 = std::min(image_.height - 1, static_cast<int>(std::ceil(y1)));
    for (int y = iy0; y <= iy1; ++y) {
      for (int x = ix0; x <= ix1; ++x) {
        if (inside(Vec{static_cast<double>(x), static_cast<double>(y)})) {
          image_.set(x, y, color);
        }
      }
    }
  }

  void line(Vec a, Vec b, double width, Rgb color) {
    const double h = width / 2.0;
    fill_where(std::min(a.x, b.x) - h, std::min(a.y, b.y) - h, std::max(a.x, b.x) + h,
               std::max(a.y, b.y) + h, color,
               [&](Vec p) { return dist_to_segment(p, a, b) <= h; });
  }

  void dashed_line(Vec a, Vec b, double width, int on, int off, Rgb color) {
    const double h = width / 2.0;
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const double period = static_cast<double>(on + off);
    fill_where(std::min(a.x, b.x) - h, std::min(a.y, b.y) - h, std::max(a.x, b.x) + h,
               std::max(a.y, b.y) + h, color, [&](Vec p) {
                 double t = 0.0;
                 if (dist_to_segment(p, a, b, &t) > h) return false;
                 return std::fmod(t * len, period) < static_cast<double>(on);
               });
  }

  // Ring (or arc, when `in_arc` restricts the angle) of the given radius.
  template <class AnglePred>
  void ring(Vec c, double radius, double width, Rgb color, AnglePred in_arc) {
    const double h = width / 2.0;
    const double r = radius + h;
    fill_where(c.x - r, c.y - r, c.x + r, c.y + r, color, [&](Vec p) {
      const double dx = p.x - c.x;
      const double dy = p.y - c.y;
      if (std::abs(std::sqrt(dx * dx + dy * dy) - radius) > h) return false;
      return in_arc(std::atan2(dy, dx) * 180.0 / std::numbers::pi);
    });
  }

  void ring(Vec c, double radius, double width, Rgb color) {
    ring(c, radius, width, color, [](double) { return true; });
  }

  void rect(int x0, int y0, int x1, int y1, Rgb color) {
    fill_where(x0, y0, x1, y1, color, [](Vec) { return true; });
  }

  void triangle(Vec a, Vec b, Vec c, Rgb color) {
    auto edge = [](Vec p, Vec q, Vec r) { return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x); };
    const double area = edge(a, b, c);
    fill_where(std::min({a.x, b.x, c.x}), std::min({a.y, b.y, c.y}), std::max({a.x, b.x, c.x}),
               std::max({a.y, b.y, c.y}), color, [&](Vec p) {
                 const double w0 = edge(b, c, p);
                 const double w1 = edge(c, a, p);
                 const double w2 = edge(a, b, p);
                 if (area >= 0) return w0 >= 0 && w1 >= 0 && w2 >= 0;
                 return w0 <= 0 && w1 <= 0 && w2 <= 0;
               });
  }

  void arrowhead(Vec tip, Vec dir, double length, double width, Rgb color) {
    const double norm = std::hypot(dir.x, dir.y);
    if (norm == 0.0) return;
    const double ux = dir.x / norm;
    const double uy = dir.y / norm;
    constexpr double kSpread = 30.0 * std::numbers::pi / 180.0;
    for (double sign : {-1.0, 1.0}) {
      const double c = std::cos(sign * kSpread);
      const double s = std::sin(sign * kSpread);
      const Vec back{-(ux * c - uy * s), -(ux * s + uy * c)};
      line(tip, Vec{tip.x + back.x * length, tip.y + back.y * length}, width, color);
    }
  }

  void text(std::string_view s, Vec center, int scale, Rgb color);

 private:
  Image& image_;
};

// 5x7 glyphs for the badge labels; each row is 5 bits, MSB = leftmost.
struct Glyph {
  char ch;
  std::array<std::uint8_t, 7> rows;
};
constexpr std::array<Glyph, 3> kFont{{
    {'O', {0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110}},
    {'N', {0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001, 0b10001}},
    {'F', {0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000}},
}};

void Canvas::text(std::string_view s, Vec center, int scale, Rgb color) {
  const int advance = 6 * scale;
  const int total = static_cast<int>(s.size()) * advance - scale;
  const int left = static_cast<int>(center.x) - total / 2;
  const int top = static_cast<int>(center.y) - (7 * scale) / 2;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto it = std::find_if(kFont.begin(), kFont.end(),
                                 [&](const Glyph& g) { return g.ch == s[i]; });
    if (it == kFont.end()) continue;
    for (int row = 0; row < 7; ++row) {
      for (int col = 0; col < 5; ++col) {
        if (((it->rows[row] >> (4 - col)) & 1) == 0) continue;
        const int x = left + static_cast<int>(i) * advance + col * scale;
        const int y = top + row * scale;
        rect(x, y, x + scale - 1, y + scale - 1, color);
      }
    }
  }
}

void draw_crosshair(Canvas& canvas, Vec c, const RenderStyle& style) {
  const double arm = GlyphMetrics::crosshair_arm;
  canvas.ring(c, GlyphMetrics::crosshair_ring, 2.0, style.crosshair);
  canvas.line({c.x - arm, c.y}, {c.x + arm, c.y}, 2.0, style.crosshair);
  canvas.line({c.x, c.y - arm}, {c.x, c.y + arm}, 2.0, style.crosshair);
}

void draw_symbol(Canvas& canvas, const SymbolInstance& s, const RenderStyle& style) {
  const Vec start = to_vec(s.start);
  const double lw = static_cast<double>(style.line_width);
  switch (s.kind) {
    case SymbolKind::StraightArrow: {
      const Vec end = to_vec(*s.end);
      const Rgb color = style.axis_rgb(*s.color);
      canvas.line(start, end, lw, color);
      canvas.arrowhead(end, {end.x - start.x, end.y - start.y}, kArrowheadLength, lw, color);
      break;
    }
    case SymbolKind::SemiCircularArrow: {
      // 270 degree arc with the gap at the top; screen angles grow clockwise.
      constexpr double kFrom = -45.0;
      constexpr double kTo = 225.0;
      const double r = GlyphMetrics::rotation_radius;
      canvas.ring(start, r, lw, style.rotation, [](double deg) {
        const double a = deg < kFrom ? deg + 360.0 : deg;
        return a <= kTo;
      });
      const bool cw = *s.rotation_dir == RotationDir::Clockwise;
      const double a = (cw ? kTo : kFrom) * std::numbers::pi / 180.0;
      const Vec tip{start.x + r * std::cos(a), start.y + r * std::sin(a)};
      const Vec tangent = cw ? Vec{-std::sin(a), std::cos(a)} : Vec{std::sin(a), -std::cos(a)};
      canvas.arrowhead(tip, tangent, GlyphMetrics::rotation_head, lw, style.rotation);
      break;
    }
    case SymbolKind::DualCrosshairs: {
      const Vec end = to_vec(*s.end);
      canvas.dashed_line(start, end, 2.0, style.dash_on, style.dash_off, style.crosshair);
      draw_crosshair(canvas, start, style);
      draw_crosshair(canvas, end, style);
      break;
    }
    case SymbolKind::Crosshair:
      draw_crosshair(canvas, start, style);
      break;
    case SymbolKind::GripperStateLabel: {
      const bool on = *s.gripper_state == GripperState::On;
      canvas.rect(s.start.x - GlyphMetrics::badge_half_width,
                  s.start.y - GlyphMetrics::badge_half_height,
                  s.start.x + GlyphMetrics::badge_half_width,
                  s.start.y + GlyphMetrics::badge_half_height,
                  on ? style.badge_on : style.badge_off);
      canvas.text(on ? "ON" : "OFF", start, 2, style.badge_text);
      break;
    }
    case SymbolKind::ProhibitionIcon: {
      const double r = GlyphMetrics::prohibition_radius;
      const double d = r / std::numbers::sqrt2;
      canvas.ring(start, r, lw, style.prohibition);
      canvas.line({start.x - d, start.y - d}, {start.x + d, start.y + d}, lw, style.prohibition);
      break;
    }
    case SymbolKind::RewindIcon: {
      const double h = GlyphMetrics::rewind_half;
      const double v = 12.0;
      canvas.triangle({start.x - h, start.y}, {start.x, start.y - v}, {start.x, start.y + v},
                      style.rewind);
      canvas.triangle({start.x, start.y}, {start.x + h, start.y - v}, {start.x + h, start.y + v},
                      style.rewind);
      break;
    }
  }
}

}  // namespace

Rgb RenderStyle::axis_rgb(AxisColor color) const {
  switch (color) {
    case AxisColor::Red:
      return {primary, secondary, secondary};
    case AxisColor::Green:
      return {secondary, primary, secondary};
    case AxisColor::Blue:
      return {secondary, secondary, primary};
  }
  return {};
}

Image render_overlay(const Image& frame, const SymbolSet& set, const RenderStyle& style) {
  check_image(frame);
  require_valid(set, FrameDims{frame.width, frame.height});
  Image out = frame;
  Canvas canvas(out);
  for (const auto& s : set.symbols) draw_symbol(canvas, s, style);
  return out;
}

}  // namespace symguide::symbols
