#include "symguide/annotation/repository.hpp"

#include <algorithm>
#include <fstream>

#include "symguide/common/errors.hpp"

namespace symguide::annotation {

namespace fs = std::filesystem;

AnnotationRepository::AnnotationRepository(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

namespace {

std::optional<AnnotationRecord> read_doc(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw IoError("corrupt annotation document " + path.string());
  return annotation_from_json(j);
}

}  // namespace

std::optional<AnnotationRecord> AnnotationRepository::load(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return read_doc(dir_ / (id + ".json"));
}

std::vector<AnnotationRecord> AnnotationRepository::load_all() const {
  std::shared_lock lock(mutex_);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir_)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<AnnotationRecord> out;
  for (const auto& f : files) {
    if (auto r = read_doc(f)) out.push_back(std::move(*r));
  }
  return out;
}

void AnnotationRepository::save(const AnnotationRecord& record) {
  if (record.trajectory_id.empty() || record.trajectory_id.find('/') != std::string::npos) {
    throw InvalidArgument("bad trajectory id for annotation: " + record.trajectory_id);
  }
  std::unique_lock lock(mutex_);
  const fs::path path = dir_ / (record.trajectory_id + ".json");
  if (auto current = read_doc(path); current && current->stage == Stage::Finalized) {
    if (*current == record) return;
    throw ImmutableError(record.trajectory_id + " is finalized");
  }
  const fs::path tmp = dir_ / (".tmp-" + record.trajectory_id + ".json");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << to_json(record).dump(2) << "\n";
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

LeaseManager::LeaseManager(Clock clock, std::chrono::seconds duration)
    : clock_(std::move(clock)), duration_(duration) {}

Lease LeaseManager::acquire(const std::string& id, const std::string& annotator) {
  if (annotator.empty()) throw InvalidArgument("annotator_id is required");
  std::lock_guard lock(mutex_);
  const auto now = clock_();
  if (auto it = leases_.find(id); it != leases_.end() && it->second.expires_at > now &&
                                  it->second.annotator_id != annotator) {
    throw LeaseConflict(id + " is being edited by " + it->second.annotator_id);
  }
  Lease lease{id, annotator, now + duration_};
  leases_[id] = lease;
  return lease;
}

void LeaseManager::require(const std::string& id, const std::string& annotator) const {
  std::lock_guard lock(mutex_);
  const auto it = leases_.find(id);
  if (it == leases_.end() || it->second.expires_at <= clock_()) {
    throw LeaseConflict(id + " has no active lease for " + annotator);
  }
  if (it->second.annotator_id != annotator) {
    throw LeaseConflict(id + " is being edited by " + it->second.annotator_id);
  }
}

void LeaseManager::release(const std::string& id, const std::string& annotator) {
  std::lock_guard lock(mutex_);
  const auto it = leases_.find(id);
  if (it == leases_.end()) return;
  if (it->second.annotator_id != annotator && it->second.expires_at > clock_()) {
    throw LeaseConflict(id + " is held by " + it->second.annotator_id);
  }
  leases_.erase(it);
}

std::optional<Lease> LeaseManager::holder(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = leases_.find(id);
  if (it == leases_.end() || it->second.expires_at <= clock_()) return std::nullopt;
  return it->second;
}

}  // namespace symguide::annotation
