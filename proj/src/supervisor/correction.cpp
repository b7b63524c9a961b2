#include "symguide/supervisor/correction.hpp"

#include <algorithm>

#include "symguide/common/errors.hpp"
#include "symguide/symbols/geometry.hpp"
#include "symguide/symbols/render.hpp"

namespace symguide::supervisor {

using symbols::Arm;
using symbols::Rect;
using symbols::SymbolKind;

namespace {

std::pair<int, int> expand_axis(int lo, int hi, int size) {
  if (size < kRoiMinSize) {
    throw InvalidArgument("frame side " + std::to_string(size) + " is below the minimum roi size");
  }
  int a = std::clamp(lo - kRoiMargin, 0, size - 1);
  int b = std::clamp(hi + kRoiMargin, 0, size - 1);
  if (a > b) std::swap(a, b);
  const int len = b - a + 1;
  if (len < kRoiMinSize) {
    const int need = kRoiMinSize - len;
    a -= need / 2;
    b += need - need / 2;
    if (a < 0) {
      b -= a;
      a = 0;
    }
    if (b > size - 1) {
      a -= b - (size - 1);
      b = size - 1;
    }
  }
  return {a, b};
}

int priority(SymbolKind kind) {
  switch (kind) {
    case SymbolKind::DualCrosshairs: return 0;
    case SymbolKind::Crosshair: return 1;
    case SymbolKind::StraightArrow: return 2;
    default: return -1;
  }
}

}  // namespace

Rect expand_roi(const Rect& bbox, symbols::FrameDims dims) {
  const auto [x0, x1] = expand_axis(bbox.x0, bbox.x1, dims.width);
  const auto [y0, y1] = expand_axis(bbox.y0, bbox.y1, dims.height);
  return Rect{x0, y0, x1, y1};
}

MaskSpec build_vsf_mask(const symbols::SymbolSet& set, symbols::FrameDims dims, Arm guided) {
  if (set.symbols.empty()) throw EmptySetError("VSF mask needs at least one symbol");
  MaskSpec m;
  m.head_roi = expand_roi(symbols::symbol_bbox(set), dims);
  m.left_wrist = guided == Arm::Left ? WristMask::Keep : WristMask::ZeroAll;
  m.right_wrist = guided == Arm::Right ? WristMask::Keep : WristMask::ZeroAll;
  return m;
}

ObservationFrames apply_mask(const ObservationFrames& frames, const MaskSpec& mask) {
  const auto& head = frames.head;
  const auto& r = mask.head_roi;
  if (r.x0 < 0 || r.y0 < 0 || r.x0 > r.x1 || r.y0 > r.y1 || r.x1 >= head.width || r.y1 >= head.height) {
    throw DimensionMismatch("roi does not fit the " + std::to_string(head.width) + "x" +
                            std::to_string(head.height) + " head frame");
  }
  check_image(head);
  ObservationFrames out;
  out.head = Image(head.width, head.height);
  const std::size_t row_bytes = static_cast<std::size_t>(r.width()) * 3;
  for (int y = r.y0; y <= r.y1; ++y) {
    const auto off = head.offset(r.x0, y);
    std::copy_n(head.pixels.begin() + static_cast<std::ptrdiff_t>(off), row_bytes,
                out.head.pixels.begin() + static_cast<std::ptrdiff_t>(off));
  }
  auto wrist = [](const std::optional<Image>& view, WristMask policy) -> std::optional<Image> {
    if (!view) return std::nullopt;
    if (policy == WristMask::Keep) return view;
    return Image(view->width, view->height);
  };
  out.left_wrist = wrist(frames.left_wrist, mask.left_wrist);
  out.right_wrist = wrist(frames.right_wrist, mask.right_wrist);
  return out;
}

PmcTarget build_pmc_command(const symbols::SymbolSet& set, bool grasp) {
  const symbols::SymbolInstance* best = nullptr;
  for (const auto& s : set.symbols) {
    const int p = priority(s.kind);
    if (p < 0) continue;
    if (!best || p < priority(best->kind)) best = &s;
  }
  if (!best) throw NoTargetError("no symbol in the set marks a target point");
  return PmcTarget{best->arm, symbols::target_point(*best), grasp};
}

bool needs_grasp(const DiagnosisResponse& d) {
  for (const auto& c : d.low_level_commands) {
    if (c.verb == annotation::Verb::CloseGripper) return true;
  }
  if (d.symbol_set) {
    for (const auto& s : d.symbol_set->symbols) {
      if (s.kind == SymbolKind::GripperStateLabel && s.gripper_state == symbols::GripperState::On) {
        return true;
      }
    }
  }
  return false;
}

Arm guided_arm(const DiagnosisResponse& d) {
  if (!d.low_level_commands.empty()) return d.low_level_commands.front().arm;
  if (d.symbol_set) {
    for (const auto& s : d.symbol_set->symbols) {
      if (s.arm != Arm::None) return s.arm;
    }
  }
  return Arm::None;
}

CorrectionCommand make_correction(const DiagnosisResponse& d, const Image& head, CorrectionMode mode) {
  CorrectionCommand c;
  c.mode = mode;
  const bool has_symbols = d.symbol_set && !d.symbol_set->symbols.empty();
  c.overlay_frame = has_symbols ? symbols::render_overlay(head, *d.symbol_set) : head;
  c.textual_prompt = annotation::render_commands(d.low_level_commands);
  const Arm arm = guided_arm(d);
  const symbols::FrameDims dims{head.width, head.height};

  if (mode == CorrectionMode::Vsf) {
    if (has_symbols) {
      c.mask = build_vsf_mask(*d.symbol_set, dims, arm);
    } else {
      MaskSpec m;
      m.head_roi = Rect{0, 0, head.width - 1, head.height - 1};
      m.left_wrist = arm == Arm::Left ? WristMask::Keep : WristMask::ZeroAll;
      m.right_wrist = arm == Arm::Right ? WristMask::Keep : WristMask::ZeroAll;
      c.mask = m;
    }
    return c;
  }

  try {
    if (!has_symbols) throw NoTargetError("no symbols");
    c.pmc_target = build_pmc_command(*d.symbol_set, needs_grasp(d));
  } catch (const NoTargetError&) {
    std::vector<annotation::LowLevelCommand> hold;
    for (Arm a : {Arm::Left, Arm::Right}) {
      if (arm == Arm::None || arm == a) hold.push_back({a, annotation::Verb::HoldStill, {}, {}, {}});
    }
    c.textual_prompt = annotation::render_commands(hold);
    c.hold_still_fallback = true;
  }
  return c;
}

}  // namespace symguide::supervisor
