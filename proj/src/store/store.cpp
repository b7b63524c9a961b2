#include "symguide/store/store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "symguide/common/errors.hpp"
#include "symguide/common/hashing.hpp"
#include "symguide/store/media.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace symguide::store {
namespace {

constexpr std::array<const char*, 3> kViewNames = {"head", "wrist0", "wrist1"};

const char* view_name(View view) { return kViewNames[static_cast<std::size_t>(view)]; }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return json::parse(in);
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::string hash_file(const fs::path& path) { return sha256_hex(read_file_bytes(path)); }

// Digest over the metadata (minus store-assigned media paths) and the
// media bytes, in view order.
std::string content_hash(const TrajectoryRecord& meta, const MediaInput& media) {
  TrajectoryRecord canonical = meta;
  canonical.head_video.clear();
  canonical.wrist_videos.clear();
  std::string digest_input = json(canonical).dump();
  std::vector<fs::path> views{media.head};
  views.insert(views.end(), media.wrist.begin(), media.wrist.end());
  for (const auto& view : views) {
    if (is_frame_directory(view)) {
      digest_input += "\nframes";
      for (const auto& f : list_frame_files(view)) digest_input += " " + hash_file(f);
    } else {
      digest_input += "\nvideo " + hash_file(view);
    }
  }
  return sha256_hex(digest_input);
}

}  // namespace

std::size_t duration_bin(double duration_s) {
  std::size_t bin = 0;
  while (bin < kDurationBinEdges.size() && duration_s >= kDurationBinEdges[bin]) ++bin;
  return bin;
}

TrajectoryStore::TrajectoryStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "trajectories");
  std::set<std::string> indexed;
  if (std::ifstream in(root_ / "index.jsonl"); in) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json doc = json::parse(line);
      Entry e{doc.at("record").get<TrajectoryRecord>(), doc.at("content_hash").get<std::string>(),
              doc.at("media_kinds").get<std::vector<std::string>>()};
      indexed.insert(e.record.id);
      entries_[e.record.id] = std::move(e);
    }
  }
  // Recover directories that were renamed into place but never indexed, and
  // drop staging leftovers.
  std::ofstream index(root_ / "index.jsonl", std::ios::app);
  for (const auto& dir : fs::directory_iterator(root_ / "trajectories")) {
    const std::string name = dir.path().filename().string();
    if (name.starts_with(".tmp-")) {
      fs::remove_all(dir.path());
      continue;
    }
    if (indexed.contains(name) || !fs::exists(dir.path() / "meta.json")) continue;
    const json doc = read_json(dir.path() / "meta.json");
    index << doc.dump() << '\n';
    entries_[name] = Entry{doc.at("record").get<TrajectoryRecord>(),
                           doc.at("content_hash").get<std::string>(),
                           doc.at("media_kinds").get<std::vector<std::string>>()};
  }
}

fs::path TrajectoryStore::trajectory_dir(const std::string& id) const {
  return root_ / "trajectories" / id;
}

std::mutex& TrajectoryStore::id_mutex(const std::string& id) {
  std::lock_guard lock(id_mutexes_guard_);
  auto& slot = id_mutexes_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::string TrajectoryStore::ingest(const TrajectoryRecord& meta, const MediaInput& media) {
  check_record(meta);
  if (media.wrist.size() > 2) throw InvalidArgument("at most 2 wrist videos");

  std::vector<fs::path> inputs{media.head};
  inputs.insert(inputs.end(), media.wrist.begin(), media.wrist.end());
  std::vector<std::string> kinds;
  for (const auto& input : inputs) {
    if (!fs::exists(input)) throw MediaDecodeError("media not found: " + input.string());
    if (is_frame_directory(input)) {
      verify_frame_directory(input);
      kinds.emplace_back("frames");
    } else {
      verify_video(input);
      kinds.emplace_back("video");
    }
  }
  const std::string hash = content_hash(meta, media);

  std::lock_guard id_lock(id_mutex(meta.id));
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(meta.id); it != entries_.end()) {
      if (it->second.content_hash == hash) return meta.id;
      throw DuplicateIdError("trajectory id '" + meta.id + "' already holds different content");
    }
  }

  std::mt19937_64 salt(std::random_device{}());
  const fs::path staging = root_ / "trajectories" / (".tmp-" + meta.id + "-" + std::to_string(salt()));
  fs::create_directories(staging / "media");

  TrajectoryRecord stored = meta;
  stored.wrist_videos.clear();
  for (std::size_t v = 0; v < inputs.size(); ++v) {
    const std::string name = kViewNames[v];
    std::string rel;
    if (kinds[v] == "frames") {
      const fs::path dest = staging / "media" / name;
      fs::create_directories(dest);
      const auto files = list_frame_files(inputs[v]);
      for (std::size_t i = 0; i < files.size(); ++i) {
        fs::copy_file(files[i], dest / frame_file_name(i, files[i].extension().string()));
      }
      rel = "trajectories/" + meta.id + "/media/" + name;
    } else {
      const std::string file = name + inputs[v].extension().string();
      fs::copy_file(inputs[v], staging / "media" / file);
      rel = "trajectories/" + meta.id + "/media/" + file;
    }
    if (v == 0) {
      stored.head_video = rel;
    } else {
      stored.wrist_videos.push_back(rel);
    }
  }

  const json doc = {{"record", stored}, {"content_hash", hash}, {"media_kinds", kinds}};
  write_json(staging / "meta.json", doc);

  std::unique_lock lock(mutex_);
  fs::rename(staging, trajectory_dir(meta.id));
  std::ofstream index(root_ / "index.jsonl", std::ios::app);
  index << doc.dump() << '\n';
  if (!index) throw IoError("cannot append to index");
  entries_[meta.id] = Entry{stored, hash, kinds};
  return meta.id;
}

std::vector<TrajectoryRecord> TrajectoryStore::list() const {
  std::shared_lock lock(mutex_);
  std::vector<TrajectoryRecord> out;
  out.reserve(entries_.size());
  for (const auto& [id, e] : entries_) out.push_back(e.record);
  return out;
}

std::optional<TrajectoryRecord> TrajectoryStore::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(id);
  if (it == entries_.end()) return std::nullopt;
  return it->second.record;
}

bool TrajectoryStore::contains(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return entries_.contains(id);
}

TrajectoryRecord TrajectoryStore::get(const std::string& id) const {
  auto r = find(id);
  if (!r) throw NotFoundError("unknown trajectory '" + id + "'");
  return *r;
}

const TrajectoryStore::Entry& TrajectoryStore::entry(const std::string& id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw NotFoundError("unknown trajectory '" + id + "'");
  return it->second;
}

std::vector<FrameRef> TrajectoryStore::sample_frames(const std::string& id,
                                                     std::span<const double> extra) const {
  return store::sample_frames(get(id), extra);
}

fs::path TrajectoryStore::frames_dir(const std::string& id, View view) const {
  std::string kind;
  std::string rel;
  {
    std::shared_lock lock(mutex_);
    const Entry& e = entry(id);
    const auto v = static_cast<std::size_t>(view);
    if (v >= e.media_kinds.size()) {
      throw NotFoundError("trajectory '" + id + "' has no " + view_name(view) + " view");
    }
    kind = e.media_kinds[v];
    rel = v == 0 ? e.record.head_video : e.record.wrist_videos[v - 1];
  }
  if (kind == "frames") return root_ / rel;

  // Lazy extraction of video frames, once per view.
  const fs::path out = trajectory_dir(id) / "frames" / view_name(view);
  std::lock_guard lock(extract_mutex_);
  if (!fs::exists(out)) {
    const fs::path staging = out.parent_path() / (std::string(".tmp-") + view_name(view));
    fs::remove_all(staging);
    extract_video_frames(root_ / rel, staging);
    fs::rename(staging, out);
  }
  return out;
}

std::vector<fs::path> TrajectoryStore::frame_files(const std::string& id, View view) const {
  return list_frame_files(frames_dir(id, view));
}

std::size_t TrajectoryStore::frame_count(const std::string& id, View view) const {
  return frame_files(id, view).size();
}

fs::path TrajectoryStore::frame_path(const std::string& id, int frame_index, View view) const {
  const auto record = get(id);
  const auto files = frame_files(id, view);
  // Timestamps at the very end of the clip round to one past the last frame.
  const auto last_valid =
      std::max<long long>(static_cast<long long>(files.size()) - 1,
                          std::llround(std::ceil(record.duration_s * record.fps_native)));
  if (frame_index < 0 || frame_index > last_valid || files.empty()) {
    throw NotFoundError("frame " + std::to_string(frame_index) + " of '" + id + "' not found");
  }
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(frame_index), files.size() - 1);
  return files[i];
}

std::string TrajectoryStore::frame_relpath(const std::string& id, int frame_index,
                                           View view) const {
  return fs::relative(frame_path(id, frame_index, view), root_).generic_string();
}

std::vector<std::uint8_t> TrajectoryStore::frame_bytes(const std::string& id, int frame_index,
                                                       View view) const {
  return read_file_bytes(frame_path(id, frame_index, view));
}

Image TrajectoryStore::frame_image(const std::string& id, int frame_index, View view) const {
  return load_image(frame_path(id, frame_index, view));
}

void TrajectoryStore::put_subtask_plan(const SubtaskPlan& plan) {
  if (plan.subtasks.empty()) throw InvalidArgument("subtask plan must not be empty");
  if (!contains(plan.trajectory_id)) {
    throw NotFoundError("unknown trajectory '" + plan.trajectory_id + "'");
  }
  std::lock_guard id_lock(id_mutex(plan.trajectory_id));
  const fs::path target = trajectory_dir(plan.trajectory_id) / "subtasks.json";
  const fs::path staging = target.string() + ".tmp";
  write_json(staging, json(plan));
  fs::rename(staging, target);
}

std::optional<SubtaskPlan> TrajectoryStore::subtask_plan(const std::string& id) const {
  if (!contains(id)) throw NotFoundError("unknown trajectory '" + id + "'");
  const fs::path path = trajectory_dir(id) / "subtasks.json";
  if (!fs::exists(path)) return std::nullopt;
  return read_json(path).get<SubtaskPlan>();
}

DatasetStats TrajectoryStore::stats(const StatsFilter& filter,
                                    const FailureTypeLookup& failure_type) const {
  std::shared_lock lock(mutex_);
  DatasetStats s;
  for (const auto& [id, e] : entries_) {
    const auto& r = e.record;
    if (filter.success && *filter.success != r.success) continue;
    if (filter.source && *filter.source != r.source) continue;
    if (filter.task_ids && !filter.task_ids->contains(r.task_id)) continue;
    ++s.total;
    ++(r.success ? s.successes : s.failures);
    ++s.by_source[std::string(to_token(r.source))];
    if (!r.success && failure_type) {
      if (auto type = failure_type(id)) ++s.by_failure_type[*type];
    }
    ++s.duration_histogram[duration_bin(r.duration_s)];
  }
  return s;
}

}  // namespace symguide::store
