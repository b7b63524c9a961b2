#pragma once

#include <chrono>
#include <filesystem>
#include <random>
#include <string>

#include "symguide/common/clock.hpp"
#include "symguide/common/random.hpp"
#include "symguide/store/media.hpp"
#include "symguide/store/store.hpp"
#include "symguide/symbols/image.hpp"

namespace symguide::testing {

inline Clock fixed_clock(std::int64_t unix_seconds = 1'790'000'000) {
  return [unix_seconds] { return TimePoint(std::chrono::seconds(unix_seconds)); };
}


class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("symguide-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Image patterned_frame(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  Image img(w, h);
  const Rgb base{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                 static_cast<std::uint8_t>(rng.below(256))};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.set(x, y, Rgb{static_cast<std::uint8_t>(base.r + x), static_cast<std::uint8_t>(base.g + y),
                        base.b});
    }
  }
  return img;
}

inline std::filesystem::path make_frame_dir(const std::filesystem::path& dir, int count, int w,
                                            int h, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    save_image(dir / store::frame_file_name(static_cast<std::size_t>(i), ".png"),
               patterned_frame(w, h, seed * 1000 + static_cast<std::uint64_t>(i)));
  }
  return dir;
}

inline store::TrajectoryRecord make_record(const std::string& id, double duration_s,
                                           bool success = false, int task_id = 1,
                                           double fps = 2.0) {
  store::TrajectoryRecord r;
  r.id = id;
  r.task_id = task_id;
  r.task_instruction = "Put the cube into the bowl";
  r.source = store::Source::Teleoperation;
  r.duration_s = duration_s;
  r.fps_native = fps;
  r.success = success;
  return r;
}

// Ingests a trajectory backed by a small frame directory at `fps` frames/s.
inline std::string ingest_simple(store::TrajectoryStore& st, const TempDir& scratch,
                                 const store::TrajectoryRecord& r, int w = 64, int h = 48) {
  const int frames = static_cast<int>(r.duration_s * r.fps_native) + 1;
  const auto dir = make_frame_dir(scratch / ("src-" + r.id), frames, w, h,
                                  fnv1a64(r.id));
  return st.ingest(r, store::MediaInput{dir, {}});
}

}  // namespace symguide::testing
