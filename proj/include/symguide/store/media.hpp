#pragma once

#include <filesystem>
#include <vector>

namespace symguide::store {

// A media input is either a directory of pre-extracted frames (.png/.ppm,
// ordered by file name) or a container video readable by the video backend.
bool is_frame_directory(const std::filesystem::path& path);

std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

// Throws MediaDecodeError unless every frame file decodes and all share the
// same dimensions.
void verify_frame_directory(const std::filesystem::path& dir);

// Throws MediaDecodeError unless the video opens and yields a frame.
void verify_video(const std::filesystem::path& video);

// Decodes every frame into out_dir as frame_NNNNNN.png; returns the count.
std::size_t extract_video_frames(const std::filesystem::path& video,
                                 const std::filesystem::path& out_dir);

std::string frame_file_name(std::size_t index, const std::string& extension);

}  // namespace symguide::store
