#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "symguide/store/sampling.hpp"
#include "symguide/store/types.hpp"
#include "symguide/symbols/image.hpp"

namespace symguide::store {

struct MediaInput {
  std::filesystem::path head;                // frame directory or video file
  std::vector<std::filesystem::path> wrist;  // 0..2
};

// head = 0, wrist cameras = 1 and 2.
enum class View { Head = 0, Wrist0 = 1, Wrist1 = 2 };

struct StatsFilter {
  std::optional<bool> success;
  std::optional<Source> source;
  std::optional<std::set<int>> task_ids;
};

inline constexpr std::array<double, 6> kDurationBinEdges = {4, 8, 12, 16, 20, 24};

struct DatasetStats {
  std::size_t total = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::map<std::string, std::size_t> by_source;
  std::map<std::string, std::size_t> by_failure_type;  // failures with a joined annotation
  // [0,4) [4,8) [8,12) [12,16) [16,20) [20,24) [24,inf)
  std::array<std::size_t, 7> duration_histogram{};
};

std::size_t duration_bin(double duration_s);

// Returns the failure-type label of an annotated trajectory, if any.
using FailureTypeLookup = std::function<std::optional<std::string>(const std::string& id)>;

// On-disk layout under the root:
//
//   index.jsonl                          one metadata document per line
//   trajectories/<id>/meta.json          record + content hash + media kinds
//   trajectories/<id>/media/<view>/...   copied frame files (frame dirs)
//   trajectories/<id>/media/<view>.<ext> copied video (video inputs)
//   trajectories/<id>/frames/<view>/...  frames extracted lazily from video
//   trajectories/<id>/subtasks.json      subtask plan
//
// Reads run concurrently; ingest of a given id is serialized and a record
// becomes visible only after its directory is complete.
class TrajectoryStore {
 public:
  explicit TrajectoryStore(std::filesystem::path root);

  TrajectoryStore(const TrajectoryStore&) = delete;
  TrajectoryStore& operator=(const TrajectoryStore&) = delete;

  // Idempotent for identical id + content; DuplicateIdError when the id is
  // taken by different content; MediaDecodeError for undecodable media.
  std::string ingest(const TrajectoryRecord& meta, const MediaInput& media);

  std::vector<TrajectoryRecord> list() const;
  std::optional<TrajectoryRecord> find(const std::string& id) const;
  TrajectoryRecord get(const std::string& id) const;  // NotFoundError
  bool contains(const std::string& id) const;

  std::vector<FrameRef> sample_frames(const std::string& id,
                                      std::span<const double> extra_keyframes = {}) const;

  std::size_t frame_count(const std::string& id, View view = View::Head) const;
  std::filesystem::path frame_path(const std::string& id, int frame_index,
                                   View view = View::Head) const;
  // Store-relative path, used as a media reference in exported datasets.
  std::string frame_relpath(const std::string& id, int frame_index,
                            View view = View::Head) const;
  std::vector<std::uint8_t> frame_bytes(const std::string& id, int frame_index,
                                        View view = View::Head) const;
  Image frame_image(const std::string& id, int frame_index, View view = View::Head) const;

  void put_subtask_plan(const SubtaskPlan& plan);
  std::optional<SubtaskPlan> subtask_plan(const std::string& id) const;

  DatasetStats stats(const StatsFilter& filter = {},
                     const FailureTypeLookup& failure_type = {}) const;

  const std::filesystem::path& root() const { return root_; }

 private:
  struct Entry {
    TrajectoryRecord record;
    std::string content_hash;
    std::vector<std::string> media_kinds;  // "frames" or "video", per view
  };

  std::filesystem::path trajectory_dir(const std::string& id) const;
  const Entry& entry(const std::string& id) const;  // caller holds lock
  std::filesystem::path frames_dir(const std::string& id, View view) const;
  std::vector<std::filesystem::path> frame_files(const std::string& id, View view) const;
  std::mutex& id_mutex(const std::string& id);

  std::filesystem::path root_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Entry> entries_;
  std::map<std::string, std::unique_ptr<std::mutex>> id_mutexes_;
  std::mutex id_mutexes_guard_;
  mutable std::mutex extract_mutex_;
};

}  // namespace symguide::store
