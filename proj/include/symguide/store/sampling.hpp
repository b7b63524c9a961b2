#pragma once

#include <span>
#include <vector>

#include "symguide/store/types.hpp"

namespace symguide::store {

inline constexpr double kSampleFps = 1.0;

// Uniform 1 fps samples from t=0 (inclusive, t <= duration) merged with the
// requested keyframes. Refs closer than one native frame period collapse
// into one; a keyframe always wins over a uniform sample. Throws
// TimestampOutOfRange for keyframes outside [0, duration].
std::vector<FrameRef> sample_frames(const TrajectoryRecord& record,
                                    std::span<const double> keyframes);

int frame_index_at(const TrajectoryRecord& record, double timestamp_s);

}  // namespace symguide::store
