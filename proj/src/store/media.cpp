#include "symguide/store/media.hpp"

#include <algorithm>
#include <cstdio>

#if defined(__GNUC__)
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wdeprecated-enum-enum-conversion"
#endif
#include <opencv2/core.hpp>
#include <opencv2/videoio.hpp>
#if defined(__GNUC__)
#pragma GCC diagnostic pop
#endif

#include "symguide/common/errors.hpp"
#include "symguide/symbols/image.hpp"

namespace fs = std::filesystem;

namespace symguide::store {

bool is_frame_directory(const fs::path& path) { return fs::is_directory(path); }

std::vector<fs::path> list_frame_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".png" || ext == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void verify_frame_directory(const fs::path& dir) {
  const auto files = list_frame_files(dir);
  if (files.empty()) throw MediaDecodeError("no .png/.ppm frames in " + dir.string());
  int width = -1;
  int height = -1;
  for (const auto& file : files) {
    Image img;
    try {
      img = load_image(file);
    } catch (const Error& e) {
      throw MediaDecodeError(file.string() + ": " + e.what());
    }
    if (width < 0) {
      width = img.width;
      height = img.height;
    } else if (img.width != width || img.height != height) {
      throw MediaDecodeError(file.string() + ": frame size differs from first frame");
    }
  }
}

void verify_video(const fs::path& video) {
  cv::VideoCapture cap(video.string(), cv::CAP_FFMPEG);
  cv::Mat frame;
  if (!cap.isOpened() || !cap.read(frame) || frame.empty()) {
    throw MediaDecodeError("cannot decode video " + video.string());
  }
}

std::string frame_file_name(std::size_t index, const std::string& extension) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06zu", index);
  return std::string(buf) + extension;
}

std::size_t extract_video_frames(const fs::path& video, const fs::path& out_dir) {
  cv::VideoCapture cap(video.string(), cv::CAP_FFMPEG);
  if (!cap.isOpened()) throw MediaDecodeError("cannot open video " + video.string());
  fs::create_directories(out_dir);
  std::size_t count = 0;
  cv::Mat frame;
  while (cap.read(frame)) {
    if (frame.type() != CV_8UC3) {
      throw MediaDecodeError("unsupported pixel format in " + video.string());
    }
    Image img(frame.cols, frame.rows);
    for (int y = 0; y < frame.rows; ++y) {
      const auto* row = frame.ptr<std::uint8_t>(y);
      for (int x = 0; x < frame.cols; ++x) {
        img.set(x, y, Rgb{row[3 * x + 2], row[3 * x + 1], row[3 * x]});
      }
    }
    save_image(out_dir / frame_file_name(count, ".png"), img);
    ++count;
  }
  if (count == 0) throw MediaDecodeError("video " + video.string() + " has no frames");
  return count;
}

}  // namespace symguide::store
