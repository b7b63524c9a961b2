#include <algorithm>
#include <fstream>
#include <set>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/synthetic.hpp"
#include "symguide/common/errors.hpp"
#include "symguide/symbols/codec.hpp"
#include "symguide/vqa/split.hpp"

using namespace symguide;
using namespace symguide::vqa;
using annotation::LowLevelCommand;
using annotation::Verb;
using symbols::Arm;

namespace {

vqa::TrajectoryView failed_view(std::uint64_t seed = 3) {
  Rng rng(seed);
  return testing::random_view(rng, "f1", 4, false);
}

std::string file_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("closed-ended pairs") {
  TEST_CASE("failure type options cover all four types") {
    auto v = failed_view();
    v.annotation.diagnosis.failure_type = annotation::FailureType::GripperState;
    const auto pools = build_pools({v});
    const auto p = gen_closed(v, QuestionType::FailureTypeId, pools, {}, 11);
    REQUIRE(p.options.size() == 4);
    std::set<std::string> names(p.options.begin(), p.options.end());
    std::set<std::string> all;
    for (auto t : annotation::kAllFailureTypes) all.emplace(annotation::display_name(t));
    CHECK(names == all);
    CHECK(p.answer_text == "Gripper state");
    CHECK(p.options[p.answer[0] - 'A'] == "Gripper state");
  }

  TEST_CASE("failure detection has two options") {
    Rng rng(5);
    for (bool success : {true, false}) {
      const auto v = testing::random_view(rng, "d", 1, success);
      const auto p = gen_closed(v, QuestionType::FailureDetection, build_pools({v}), {}, 1);
      REQUIRE(p.options.size() == 2);
      CHECK((p.answer == "A" || p.answer == "B"));
      CHECK(p.answer_text == (success ? "Yes, the task was completed successfully." : "No, the task failed."));
      CHECK(p.media.size() == v.samples.size());
    }
  }

  TEST_CASE("same record and seed give the same pair") {
    const auto v = failed_view();
    const auto pools = build_pools({v});
    for (QuestionType t : kBenchmarkTypes) {
      if (!is_closed(t)) continue;
      CHECK(gen_closed(v, t, pools, {}, 99) == gen_closed(v, t, pools, {}, 99));
    }
  }

  TEST_CASE("keyframe and subtask distractors come from the trajectory when it is long enough") {
    auto v = failed_view();
    v.annotation.subtask_plan.subtasks = {"s0", "s1", "s2", "s3", "s4"};
    v.annotation.diagnosis.failure_subtask_index = 2;
    AnnotationPools pools{{"p0", "p1", "p2", "p3"}, {"99 s", "98 s", "97 s"}};
    const auto sub = gen_closed(v, QuestionType::FailureSubtaskLoc, pools, {}, 7);
    for (const auto& o : sub.options) CHECK(o.size() == 2);
    CHECK(sub.answer_text == "s2");

    v.annotation.subtask_plan.subtasks = {"s0", "s1", "s2"};
    const auto pooled = gen_closed(v, QuestionType::FailureSubtaskLoc, pools, {}, 7);
    int from_pool = 0;
    for (const auto& o : pooled.options) from_pool += o[0] == 'p';
    CHECK(from_pool == 3);

    const auto key = gen_closed(v, QuestionType::FailureKeyframeLoc, pools, {}, 7);
    CHECK(key.answer_text == keyframe_option(v.annotation.diagnosis.failure_keyframe->timestamp_s));
    for (const auto& o : key.options) CHECK(o.size() < 6);  // own grid, never "99 s"

    AnnotationPools thin{{"p0", "s2"}, {}};
    CHECK_THROWS_AS(gen_closed(v, QuestionType::FailureSubtaskLoc, thin, {}, 7), InsufficientPool);
  }

  TEST_CASE("low-level pairs are grounded on the keyframe") {
    const auto v = failed_view();
    const auto p = gen_closed(v, QuestionType::LowLevelAvoidance, build_pools({v}), {}, 3);
    REQUIRE(p.media.size() == 1);
    CHECK(p.media[0].role == "keyframe");
    CHECK(p.answer_text == annotation::render_commands(v.annotation.guidance.low_level_avoidance));
  }

  TEST_CASE("unique truth across a generated set") {
    const auto views = testing::random_views(17, 60, 8);
    const auto pools = build_pools(views);
    std::size_t closed = 0;
    for (const auto& v : views) {
      for (const auto& p : generate_pairs(v, pools, {}, 5).pairs) {
        if (!is_closed(p.question_type)) continue;
        ++closed;
        const std::set<std::string> distinct(p.options.begin(), p.options.end());
        REQUIRE(distinct.size() == p.options.size());
        REQUIRE(std::count(p.options.begin(), p.options.end(), p.answer_text) == 1);
        REQUIRE(p.answer.size() == 1);
        REQUIRE(p.options.at(p.answer[0] - 'A') == p.answer_text);
        REQUIRE(p.options.size() == (p.question_type == QuestionType::FailureDetection ? 2 : 4));
        const bool lists_all = p.prompt.find(std::string(1, option_letter(p.options.size() - 1)) + ". ") !=
                               std::string::npos;
        REQUIRE(lists_all);
      }
    }
    CHECK(closed > 200);
  }
}

TEST_SUITE("low-level distractors") {
  TEST_CASE("arm matching example") {
    const LowLevelCommand truth{Arm::Left, Verb::Move, annotation::Direction::Right, std::nullopt,
                                symbols::Magnitude::Slight};
    const auto d = gen_low_level_distractors({truth}, default_static_pool(), full_dynamic_pool(), 1);
    REQUIRE(d.size() == 3);
    for (const auto& text : d) {
      CHECK(text.find("left") != std::string::npos);
      CHECK(text.find("right gripper") == std::string::npos);
      CHECK(annotation::parse_command(text)->arm == Arm::Left);
      CHECK(text != "Move the left gripper to the right slightly");
    }
  }

  TEST_CASE("seeded property over many truths") {
    Rng rng(2024);
    const auto pool = full_dynamic_pool();
    for (int i = 0; i < 2000; ++i) {
      std::vector<LowLevelCommand> truth;
      const std::size_t n = 1 + rng.below(3);
      for (std::size_t k = 0; k < n; ++k) truth.push_back(pool[rng.below(pool.size())]);
      const auto d = gen_low_level_distractors(truth, default_static_pool(), pool, rng.next());
      const std::string t = annotation::render_commands(truth);
      REQUIRE(std::set<std::string>(d.begin(), d.end()).size() == 3);
      for (const auto& text : d) {
        REQUIRE(text != t);
        const auto cmds = annotation::parse_commands(text);
        REQUIRE(cmds.size() == truth.size());
        for (std::size_t k = 0; k < n; ++k) REQUIRE(cmds[k].arm == truth[k].arm);
      }
    }
  }

  TEST_CASE("exhaustive small pool") {
    const auto left = annotation::command_vocabulary(Arm::Left);
    const LowLevelCommand truth = left[0];
    const std::vector<LowLevelCommand> dynamic{left[0], left[5], left[19], left[22],
                                               annotation::command_vocabulary(Arm::Right)[3]};
    const auto d = gen_low_level_distractors({truth}, StaticPool{}, dynamic, 77);
    const std::set<std::string> got(d.begin(), d.end());
    const std::set<std::string> want{annotation::render_command(left[5]),
                                     annotation::render_command(left[19]),
                                     annotation::render_command(left[22])};
    CHECK(got == want);
    CHECK_THROWS_AS(gen_low_level_distractors({truth}, StaticPool{}, {left[0], left[5], left[6]}, 1),
                    InsufficientPool);
  }

  TEST_CASE("static pool configuration") {
    testing::TempDir dir;
    const auto repo_config = std::filesystem::path(SYMGUIDE_SOURCE_DIR) / "config/static_distractors.json";
    CHECK(load_static_pool(repo_config).templates == default_static_pool().templates);
    std::ofstream(dir / "bad.json") << R"({"templates": ["Hold still"]})";
    CHECK_THROWS_AS(load_static_pool(dir / "bad.json"), InvalidArgument);
    std::ofstream(dir / "bad2.json") << R"({"templates": ["Wiggle the {arm} arm"]})";
    CHECK_THROWS_AS(load_static_pool(dir / "bad2.json"), InvalidArgument);
    CHECK(default_static_pool().render(Arm::Right)[0] == "Hold the right arm still");
  }
}

TEST_SUITE("open-ended and visual guidance pairs") {
  TEST_CASE("failure reason is passed through") {
    auto v = failed_view();
    v.annotation.diagnosis.failure_type = annotation::FailureType::Gripper6dPose;
    const auto p = gen_open(v, QuestionType::FailureReason, 1);
    CHECK(p.answer == *v.annotation.diagnosis.failure_reason);
    CHECK(p.options.empty());
  }

  TEST_CASE("CoT answer contains the guidance and no keyframe media") {
    const auto v = failed_view();
    const auto p = gen_open(v, QuestionType::LowLevelCorrectionCoT, 1);
    REQUIRE(p.cot_answer);
    CHECK(p.cot_answer->find(annotation::render_commands(v.annotation.guidance.low_level_correction)) !=
          std::string::npos);
    CHECK(p.cot_answer->rfind("Failure detection:", 0) == 0);
    CHECK(p.cot_answer->find("\nFailure localization:") != std::string::npos);
    CHECK(p.cot_answer->find("\nLow-level guidance:") != std::string::npos);
    for (const auto& m : p.media) CHECK(m.role == "frame");
  }

  TEST_CASE("open types reject successes") {
    Rng rng(1);
    const auto v = testing::random_view(rng, "s", 1, true);
    CHECK_THROWS_AS(gen_open(v, QuestionType::FailureReason, 1), NotAFailure);
    CHECK_THROWS_AS(gen_visual_guidance(v, symbols::SetPurpose::Avoidance, 1), NotAFailure);
  }

  TEST_CASE("symbol code answers parse back to the stored set") {
    for (const auto& v : testing::random_views(9, 200, 10)) {
      if (v.annotation.diagnosis.success) continue;
      for (auto purpose : {symbols::SetPurpose::Avoidance, symbols::SetPurpose::Correction}) {
        const auto p = gen_visual_guidance(v, purpose, 1);
        const auto& stored = purpose == symbols::SetPurpose::Avoidance
                                 ? v.annotation.guidance.avoidance_symbols
                                 : v.annotation.guidance.correction_symbols;
        REQUIRE(symbols::parse_symbol_code(p.answer, symbols::FrameDims{640, 480}) == *stored);
        REQUIRE(p.frame_width == 640);
      }
    }
  }

  TEST_CASE("missing correction symbols") {
    auto v = failed_view();
    v.annotation.guidance.correction_symbols.reset();
    CHECK_THROWS_AS(gen_visual_guidance(v, symbols::SetPurpose::Correction, 1), MissingSymbols);
  }

  TEST_CASE("applicability matrix") {
    Rng rng(8);
    const auto ok = testing::random_view(rng, "ok", 1, true);
    const auto bad = testing::random_view(rng, "bad", 1, false);
    const auto pools = build_pools({ok, bad});
    const auto s = generate_pairs(ok, pools, {}, 1);
    REQUIRE(s.pairs.size() == 1);
    CHECK(s.pairs[0].question_type == QuestionType::FailureDetection);
    const auto f = generate_pairs(bad, pools, {}, 1);
    std::multiset<QuestionType> types;
    for (const auto& p : f.pairs) types.insert(p.question_type);
    for (QuestionType t : kBenchmarkTypes) CHECK(types.count(t) == 1);
    CHECK(types.count(QuestionType::VisualGuidanceCode) == 2);
  }

  TEST_CASE("pair json round trip") {
    const auto v = failed_view();
    for (const auto& p : generate_pairs(v, build_pools({v}), {}, 4).pairs) {
      CHECK(vqa_pair_from_json(nlohmann::json::parse(to_json(p).dump())) == p);
    }
  }
}

TEST_SUITE("splits") {
  TEST_CASE("OOD task never reaches train") {
    const auto views = testing::random_views(31, 100, 10);
    SplitSpec spec{{9, 10}, {10}, 12};
    const auto split = build_split(views, spec, 5);
    for (const auto& p : split.train) CHECK(p.task_id != 10);
    for (const auto& p : split.bench) CHECK((p.task_id == 9 || p.task_id == 10));
    CHECK(split.manifest["splits"]["bench"]["trajectories"] == 12);
    const std::size_t task10 = std::count_if(views.begin(), views.end(),
                                             [](const auto& v) { return v.meta.task_id == 10; });
    const std::size_t bench10 = std::count_if(split.manifest["splits"]["bench"]["trajectory_ids"].begin(),
                                              split.manifest["splits"]["bench"]["trajectory_ids"].end(),
                                              [&](const auto& id) {
                                                return std::any_of(views.begin(), views.end(), [&](const auto& v) {
                                                  return v.meta.id == id && v.meta.task_id == 10;
                                                });
                                              });
    CHECK(split.manifest["excluded_ood_trajectories"] == task10 - bench10);
  }

  TEST_CASE("train and bench are disjoint over random specs") {
    const auto views = testing::random_views(44, 120, 12);
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
      SplitSpec spec;
      for (int t = 1; t <= 12; ++t) {
        if (rng.below(3) == 0) spec.bench_task_ids.insert(t);
      }
      if (spec.bench_task_ids.empty()) spec.bench_task_ids.insert(1);
      for (int t : spec.bench_task_ids) {
        if (rng.below(2) == 0) spec.ood_task_ids.insert(t);
      }
      spec.bench_trajectory_budget = 1 + static_cast<int>(rng.below(10 * spec.bench_task_ids.size()));
      const auto split = build_split(views, spec, rng.next());
      std::set<std::string> train_ids, bench_ids;
      for (const auto& p : split.train) train_ids.insert(p.trajectory_id);
      for (const auto& p : split.bench) bench_ids.insert(p.trajectory_id);
      for (const auto& id : bench_ids) REQUIRE_FALSE(train_ids.count(id));
      for (const auto& p : split.train) REQUIRE_FALSE(spec.ood_task_ids.count(p.task_id));
      REQUIRE(bench_ids.size() == static_cast<std::size_t>(spec.bench_trajectory_budget));
    }
  }

  TEST_CASE("infeasible specs") {
    const auto views = testing::random_views(1, 20, 4);
    CHECK_THROWS_AS(build_split(views, SplitSpec{{1}, {2}, 1}, 1), SpecInfeasible);
    CHECK_THROWS_AS(build_split(views, SplitSpec{{1, 7}, {}, 1}, 1), SpecInfeasible);
    CHECK_THROWS_AS(build_split(views, SplitSpec{{1}, {}, 0}, 1), SpecInfeasible);
    CHECK_THROWS_AS(build_split(views, SplitSpec{{1}, {}, 6}, 1), SpecInfeasible);
  }

  TEST_CASE("unfinalized records are skipped") {
    auto views = testing::random_views(2, 20, 2);
    views[0].annotation.stage = annotation::Stage::Stage3Draft;
    const auto split = build_split(views, SplitSpec{{2}, {}, 3}, 1);
    CHECK(split.manifest["skipped_unfinalized_records"] == 1);
    for (const auto& p : split.train) CHECK(p.trajectory_id != views[0].meta.id);
  }

  TEST_CASE("written splits regenerate byte-identically and read back") {
    const auto views = testing::random_views(77, 50, 6);
    const SplitSpec spec{{5, 6}, {6}, 8};
    testing::TempDir dir;
    write_split(dir / "a", build_split(views, spec, 123));
    auto shuffled = views;
    std::reverse(shuffled.begin(), shuffled.end());
    write_split(dir / "b", build_split(shuffled, spec, 123));
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir / "a")) {
      if (!entry.is_regular_file()) continue;
      const auto rel = std::filesystem::relative(entry.path(), dir / "a");
      REQUIRE(file_text(entry.path()) == file_text(dir / "b" / rel));
    }
    auto by_id = [](std::vector<VqaPair> pairs) {
      std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
      return pairs;
    };
    const auto result = build_split(views, spec, 123);
    CHECK(by_id(read_split(dir / "a/manifest.json", "bench")) == by_id(result.bench));
    CHECK(by_id(read_split(dir / "a/manifest.json", "train")) == by_id(result.train));
    const auto manifest = nlohmann::json::parse(file_text(dir / "a/manifest.json"));
    CHECK(manifest["seed"] == 123);
    CHECK(manifest["spec_sha256"].get<std::string>().size() == 64);
  }
}
