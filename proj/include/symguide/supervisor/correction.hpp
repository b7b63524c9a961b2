#pragma once

#include <optional>

#include "symguide/supervisor/types.hpp"
#include "symguide/symbols/validate.hpp"

namespace symguide::supervisor {

inline constexpr int kRoiMargin = 50;
inline constexpr int kRoiMinSize = 50;

// bbox grown by the margin on every side and clamped to the frame; a side
// shorter than the minimum is widened around its center (left/top gets the
// smaller half) and shifted back inside the frame. InvalidArgument when the
// frame itself is smaller than the minimum.
symbols::Rect expand_roi(const symbols::Rect& bbox, symbols::FrameDims dims);

// Head roi from the set's glyph footprint. The guided arm's wrist view is
// kept, every other wrist view is zeroed (both for an unarmed set).
// Throws EmptySetError.
MaskSpec build_vsf_mask(const symbols::SymbolSet& set, symbols::FrameDims dims,
                        symbols::Arm guided_arm);

// Zeroes head pixels outside the roi and wrist views marked ZeroAll.
// DimensionMismatch when the roi does not fit the head frame.
ObservationFrames apply_mask(const ObservationFrames& frames, const MaskSpec& mask);

// Target of the highest-priority targetable symbol: DualCrosshairs, then
// Crosshair, then StraightArrow; earliest in the set among equals.
// Throws NoTargetError.
PmcTarget build_pmc_command(const symbols::SymbolSet& set, bool needs_grasp);

// External grasp-pose service consulted when a PMC target asks for a grasp.
struct GraspPose {
  symbols::Point point;
  double yaw_rad = 0;
  double width_m = 0;
};

class GraspEstimator {
 public:
  virtual ~GraspEstimator() = default;
  virtual std::optional<GraspPose> estimate(const Image& head, symbols::Point target) = 0;
};

// Always proposes a top-down grasp at the target.
class FixedGraspEstimator : public GraspEstimator {
 public:
  std::optional<GraspPose> estimate(const Image&, symbols::Point target) override {
    return GraspPose{target, 0.0, 0.08};
  }
};

// True when the guidance closes a gripper (command or closed-state label).
bool needs_grasp(const DiagnosisResponse& diagnosis);

// Arm the guidance addresses: first command's arm, else the first armed
// symbol, else None.
symbols::Arm guided_arm(const DiagnosisResponse& diagnosis);

// Overlay + prompt + mask or target for a failed diagnosis. VSF without
// symbols masks nothing of the head view; PMC without a target falls back
// to a hold-still prompt.
CorrectionCommand make_correction(const DiagnosisResponse& diagnosis, const Image& head,
                                  CorrectionMode mode);

}  // namespace symguide::supervisor
