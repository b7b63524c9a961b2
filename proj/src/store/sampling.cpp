#include "symguide/store/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "symguide/common/errors.hpp"

namespace symguide::store {

int frame_index_at(const TrajectoryRecord& record, double timestamp_s) {
  return static_cast<int>(std::llround(timestamp_s * record.fps_native));
}

std::vector<FrameRef> sample_frames(const TrajectoryRecord& record,
                                    std::span<const double> keyframes) {
  for (double t : keyframes) {
    if (!(t >= 0.0 && t <= record.duration_s)) {
      std::ostringstream msg;
      msg << "keyframe at " << t << " s outside [0, " << record.duration_s << "] of "
          << record.id;
      throw TimestampOutOfRange(msg.str());
    }
  }

  std::vector<FrameRef> refs;
  for (int k = 0; static_cast<double>(k) / kSampleFps <= record.duration_s; ++k) {
    const double t = static_cast<double>(k) / kSampleFps;
    refs.push_back({record.id, frame_index_at(record, t), t, FrameOrigin::UniformSample});
  }
  for (double t : keyframes) {
    refs.push_back({record.id, frame_index_at(record, t), t, FrameOrigin::Keyframe});
  }
  // Keyframes sort ahead of uniform samples at equal timestamps.
  std::stable_sort(refs.begin(), refs.end(), [](const FrameRef& a, const FrameRef& b) {
    if (a.timestamp_s != b.timestamp_s) return a.timestamp_s < b.timestamp_s;
    return a.origin == FrameOrigin::Keyframe && b.origin != FrameOrigin::Keyframe;
  });

  const double period = 1.0 / record.fps_native;
  std::vector<FrameRef> merged;
  for (const FrameRef& ref : refs) {
    if (!merged.empty() && ref.timestamp_s - merged.back().timestamp_s < period) {
      if (ref.origin == FrameOrigin::Keyframe && merged.back().origin != FrameOrigin::Keyframe) {
        merged.back() = ref;
      }
      continue;
    }
    merged.push_back(ref);
  }
  return merged;
}

}  // namespace symguide::store
