#include "symguide/vqa/split.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "symguide/common/errors.hpp"
#include "symguide/common/hashing.hpp"
#include "symguide/common/random.hpp"
#include "symguide/store/store.hpp"

namespace symguide::vqa {

namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const SplitSpec& s) {
  return json{{"bench_task_ids", s.bench_task_ids},
              {"ood_task_ids", s.ood_task_ids},
              {"bench_trajectory_budget", s.bench_trajectory_budget}};
}

SplitSpec split_spec_from_json(const json& j) {
  try {
    SplitSpec s;
    s.bench_task_ids = j.at("bench_task_ids").get<std::set<int>>();
    s.ood_task_ids = j.value("ood_task_ids", std::set<int>{});
    s.bench_trajectory_budget = j.at("bench_trajectory_budget").get<int>();
    return s;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("split spec: ") + e.what());
  }
}

namespace {

json split_summary(const std::vector<VqaPair>& pairs, const std::vector<std::string>& trajectory_ids,
                   const std::set<int>& tasks) {
  std::map<std::string, std::size_t> counts;
  for (const auto& p : pairs) ++counts[std::string(to_token(p.question_type))];
  json files = json::array();
  for (const auto& [type, n] : counts) files.push_back(type + ".jsonl");
  return json{{"trajectories", trajectory_ids.size()},
              {"trajectory_ids", trajectory_ids},
              {"tasks", tasks},
              {"pairs", counts},
              {"total_pairs", pairs.size()},
              {"files", files}};
}

}  // namespace

SplitResult build_split(std::vector<TrajectoryView> views, const SplitSpec& spec,
                        std::uint64_t seed, const GenerationOptions& options) {
  for (int t : spec.ood_task_ids) {
    if (!spec.bench_task_ids.count(t)) {
      throw SpecInfeasible("OOD task " + std::to_string(t) + " is not a bench task");
    }
  }
  std::size_t unfinalized = 0;
  std::erase_if(views, [&](const TrajectoryView& v) {
    const bool drop = v.annotation.stage != annotation::Stage::Finalized;
    unfinalized += drop;
    return drop;
  });
  std::sort(views.begin(), views.end(),
            [](const TrajectoryView& a, const TrajectoryView& b) { return a.meta.id < b.meta.id; });

  std::vector<std::size_t> candidates;
  std::set<int> present;
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (spec.bench_task_ids.count(views[i].meta.task_id)) {
      candidates.push_back(i);
      present.insert(views[i].meta.task_id);
    }
  }
  for (int t : spec.bench_task_ids) {
    if (!present.count(t)) {
      throw SpecInfeasible("bench task " + std::to_string(t) + " has no finalized trajectory");
    }
  }
  if (spec.bench_trajectory_budget < 1 ||
      static_cast<std::size_t>(spec.bench_trajectory_budget) > candidates.size()) {
    throw SpecInfeasible("bench budget " + std::to_string(spec.bench_trajectory_budget) +
                         " outside [1, " + std::to_string(candidates.size()) + "]");
  }
  Rng rng(derive_seed(seed, "bench-selection"));
  rng.shuffle(candidates);
  candidates.resize(static_cast<std::size_t>(spec.bench_trajectory_budget));
  const std::set<std::size_t> bench_idx(candidates.begin(), candidates.end());

  const AnnotationPools pools = build_pools(views);
  SplitResult out;
  std::vector<std::string> train_ids, bench_ids;
  std::set<int> train_tasks, bench_tasks;
  std::size_t excluded_ood = 0;
  json skipped = json::array();
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& v = views[i];
    const bool bench = bench_idx.count(i) > 0;
    if (!bench && spec.ood_task_ids.count(v.meta.task_id)) {
      ++excluded_ood;
      continue;
    }
    auto gen = generate_pairs(v, pools, options, seed);
    for (const auto& s : gen.skipped) skipped.push_back({{"pair_id", s.pair_id}, {"reason", s.reason}});
    auto& dest = bench ? out.bench : out.train;
    dest.insert(dest.end(), gen.pairs.begin(), gen.pairs.end());
    (bench ? bench_ids : train_ids).push_back(v.meta.id);
    (bench ? bench_tasks : train_tasks).insert(v.meta.task_id);
  }

  const json spec_json = to_json(spec);
  out.manifest = json{{"schema_version", 1},
                      {"seed", seed},
                      {"spec", spec_json},
                      {"spec_sha256", sha256_hex(spec_json.dump())},
                      {"finalized_records", views.size()},
                      {"skipped_unfinalized_records", unfinalized},
                      {"excluded_ood_trajectories", excluded_ood},
                      {"skipped_pairs", skipped},
                      {"splits",
                       {{"train", split_summary(out.train, train_ids, train_tasks)},
                        {"bench", split_summary(out.bench, bench_ids, bench_tasks)}}}};
  return out;
}

void write_split(const fs::path& out_dir, const SplitResult& result) {
  for (const auto& [name, pairs] : {std::pair{"train", &result.train}, std::pair{"bench", &result.bench}}) {
    const fs::path dir = out_dir / name;
    fs::create_directories(dir);
    std::map<std::string, std::ofstream> files;
    for (const auto& p : *pairs) {
      const std::string type(to_token(p.question_type));
      auto it = files.find(type);
      if (it == files.end()) {
        it = files.emplace(type, std::ofstream(dir / (type + ".jsonl"), std::ios::trunc)).first;
        if (!it->second) throw IoError("cannot write " + (dir / (type + ".jsonl")).string());
      }
      it->second << to_json(p).dump() << "\n";
    }
  }
  std::ofstream manifest(out_dir / "manifest.json", std::ios::trunc);
  manifest << result.manifest.dump(2) << "\n";
  if (!manifest) throw IoError("cannot write manifest in " + out_dir.string());
}

std::vector<VqaPair> read_pairs_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<VqaPair> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw InvalidArgument(path.string() + ":" + std::to_string(n) + ": not JSON");
    out.push_back(vqa_pair_from_json(j));
  }
  return out;
}

std::vector<VqaPair> read_split(const fs::path& manifest_path, const std::string& split) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open " + manifest_path.string());
  const auto manifest = json::parse(in, nullptr, false);
  if (manifest.is_discarded()) throw InvalidArgument(manifest_path.string() + " is not JSON");
  std::vector<VqaPair> out;
  try {
    for (const auto& f : manifest.at("splits").at(split).at("files")) {
      auto pairs = read_pairs_jsonl(manifest_path.parent_path() / split / f.get<std::string>());
      out.insert(out.end(), pairs.begin(), pairs.end());
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(manifest_path.string() + ": " + e.what());
  }
  return out;
}

std::vector<TrajectoryView> make_views(const store::TrajectoryStore& st,
                                       const std::vector<annotation::AnnotationRecord>& records) {
  std::vector<TrajectoryView> views;
  for (const auto& r : records) {
    TrajectoryView v;
    v.meta = st.get(r.trajectory_id);
    v.annotation = r;
    v.samples = st.sample_frames(r.trajectory_id);
    for (const auto& f : v.samples) v.sample_paths.push_back(st.frame_relpath(r.trajectory_id, f.frame_index));
    int probe = v.samples.empty() ? 0 : v.samples.front().frame_index;
    if (const auto& key = r.diagnosis.failure_keyframe) {
      v.keyframe_path = st.frame_relpath(r.trajectory_id, key->frame_index);
      probe = key->frame_index;
    }
    if (const auto& corr = r.guidance.correction_symbols) {
      v.correction_frame_path = st.frame_relpath(r.trajectory_id, corr->frame_index);
    }
    const Image img = st.frame_image(r.trajectory_id, probe);
    v.frame_width = img.width;
    v.frame_height = img.height;
    views.push_back(std::move(v));
  }
  return views;
}

}  // namespace symguide::vqa
