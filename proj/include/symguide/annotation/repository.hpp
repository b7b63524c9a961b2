#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "symguide/annotation/record.hpp"
#include "symguide/common/clock.hpp"

namespace symguide::annotation {

// One JSON document per trajectory under <dir>/<trajectory_id>.json.
// Writes go through a temporary file and a rename, so readers only ever see
// complete documents.
class AnnotationRepository {
 public:
  explicit AnnotationRepository(std::filesystem::path dir);

  std::optional<AnnotationRecord> load(const std::string& trajectory_id) const;
  std::vector<AnnotationRecord> load_all() const;

  // ImmutableError when a finalized document would change.
  void save(const AnnotationRecord& record);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
};

struct Lease {
  std::string trajectory_id;
  std::string annotator_id;
  TimePoint expires_at;
};

// Renewable edit leases, one holder per trajectory.
class LeaseManager {
 public:
  explicit LeaseManager(Clock clock = system_clock(),
                        std::chrono::seconds duration = std::chrono::minutes(10));

  // Grants or renews. LeaseConflict when another annotator holds an
  // unexpired lease.
  Lease acquire(const std::string& trajectory_id, const std::string& annotator_id);

  // LeaseConflict unless `annotator_id` holds an unexpired lease.
  void require(const std::string& trajectory_id, const std::string& annotator_id) const;

  // Releasing someone else's lease is a LeaseConflict; releasing nothing is a no-op.
  void release(const std::string& trajectory_id, const std::string& annotator_id);

  std::optional<Lease> holder(const std::string& trajectory_id) const;

 private:
  Clock clock_;
  std::chrono::seconds duration_;
  mutable std::mutex mutex_;
  std::map<std::string, Lease> leases_;
};

}  // namespace symguide::annotation
