#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <vector>

#include "json.hpp"
#include "symguide/vqa/generator.hpp"

namespace symguide::store {
class TrajectoryStore;
}

namespace symguide::vqa {

struct SplitSpec {
  std::set<int> bench_task_ids;
  std::set<int> ood_task_ids;  // subset of bench_task_ids; never used for training
  int bench_trajectory_budget = 0;
};

nlohmann::json to_json(const SplitSpec& spec);
SplitSpec split_spec_from_json(const nlohmann::json& j);

struct SplitResult {
  std::vector<VqaPair> train;
  std::vector<VqaPair> bench;
  nlohmann::json manifest;
};

// Bench trajectories are drawn (seeded) from the bench tasks up to the
// budget; everything else goes to train except trajectories of OOD tasks,
// which are dropped when not picked for the bench. Non-finalized records
// are skipped. SpecInfeasible when OOD tasks are not bench tasks, a bench
// task has no finalized trajectory, or the budget is not in
// [1, number of bench-task trajectories].
SplitResult build_split(std::vector<TrajectoryView> views, const SplitSpec& spec,
                        std::uint64_t seed, const GenerationOptions& options = {});

// <out>/<split>/<question_type>.jsonl plus <out>/manifest.json.
void write_split(const std::filesystem::path& out_dir, const SplitResult& result);

std::vector<VqaPair> read_pairs_jsonl(const std::filesystem::path& path);

// Loads every pair listed in a manifest for one split.
std::vector<VqaPair> read_split(const std::filesystem::path& manifest_path,
                                const std::string& split = "bench");

// Resolves media paths and frame sizes for annotation records.
std::vector<TrajectoryView> make_views(const store::TrajectoryStore& store,
                                       const std::vector<annotation::AnnotationRecord>& records);

}  // namespace symguide::vqa
