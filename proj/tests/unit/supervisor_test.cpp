#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "symguide/common/errors.hpp"
#include "symguide/supervisor/diagnosis.hpp"
#include "symguide/supervisor/session.hpp"
#include "symguide/symbols/codec.hpp"
#include "symguide/symbols/geometry.hpp"
#include "symguide/symbols/render.hpp"

using namespace symguide;
using namespace symguide::supervisor;
using symbols::Arm;
using symbols::Rect;

namespace {

// Search-based reference for one roi axis: keep every coordinate within the
// margin of [lo, hi]; if that run is too short, pick the in-frame window of
// minimum length whose start is closest to the centered growth.
std::pair<int, int> roi_axis_oracle(int lo, int hi, int size) {
  int a = -1, b = -1;
  for (int x = 0; x < size; ++x) {
    const int d = x < lo ? lo - x : (x > hi ? x - hi : 0);
    if (d <= 50) {
      if (a < 0) a = x;
      b = x;
    }
  }
  if (b - a + 1 >= 50) return {a, b};
  const int ideal = a - (50 - (b - a + 1)) / 2;
  int best = 0;
  for (int s = 0; s + 49 < size; ++s) {
    if (std::abs(s - ideal) < std::abs(best - ideal)) best = s;
  }
  return {best, best + 49};
}

Image noise(Rng& rng, int w, int h) {
  Image img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(1 + rng.below(255));
  return img;
}

SupervisorConfig config(CorrectionMode mode = CorrectionMode::Vsf) {
  SupervisorConfig c;
  c.mode = mode;
  c.task_instruction = "Put the cube into the bowl";
  return c;
}

SessionOptions fixed_options(std::int64_t max_steps = 1000) {
  SessionOptions o;
  o.max_steps = max_steps;
  o.clock = testing::fixed_clock();
  return o;
}

endpoint::CallbackEndpoint scripted_vlm(std::vector<std::size_t>* image_counts = nullptr) {
  return endpoint::CallbackEndpoint([image_counts](const endpoint::ChatRequest& req) {
    if (image_counts) image_counts->push_back(req.messages.at(0).images.size());
    return scripted_vlm_reply(req);
  });
}

const char* kFailureReply =
    "Failure detection: The robot fails the task.\n"
    "Failure localization: The failure happens at 4 s, during subtask 2 (Lift the cube).\n"
    "Low-level guidance: Move the right gripper upward significantly; Close the right gripper.\n"
    "```symbols\nframe=7 purpose=correction\n"
    "straight_arrow(arm=right, color=blue, start=(300,300), end=(300,200), mag=significant)\n"
    "gripper_state(arm=right, state=on, start=(330,200))\n```\n";

}  // namespace

TEST_SUITE("cot parsing") {
  TEST_CASE("failure with commands and a symbol block") {
    const auto d = parse_cot_response(kFailureReply);
    CHECK(d.failed);
    REQUIRE(d.low_level_commands.size() == 2);
    CHECK(d.low_level_commands[0].verb == annotation::Verb::Move);
    CHECK(d.low_level_commands[0].arm == Arm::Right);
    CHECK(d.low_level_commands[1].verb == annotation::Verb::CloseGripper);
    REQUIRE(d.symbol_set.has_value());
    CHECK(d.symbol_set->frame_index == 7);
    CHECK(d.symbol_set->symbols.size() == 2);
  }

  TEST_CASE("symbol block round-trips through the codec") {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
      const auto set = testing::random_symbol_set(rng, 640, 480);
      if (set.symbols.empty()) continue;
      const auto code = symbols::emit_symbol_code(set);
      const auto d = parse_cot_response(
          "Failure detection: The robot fails.\nLow-level guidance: Hold the left arm still.\n```symbols\n" + code + "```");
      REQUIRE(d.symbol_set.has_value());
      CHECK(*d.symbol_set == set);
      CHECK(symbols::emit_symbol_code(*d.symbol_set) == code);
    }
  }

  TEST_CASE("no failure") {
    const auto d = parse_cot_response("The task is proceeding correctly.");
    CHECK_FALSE(d.failed);
    CHECK(d.low_level_commands.empty());
    CHECK_FALSE(d.symbol_set.has_value());
    CHECK_FALSE(parse_cot_response("Failure detection: The robot does not fail.\nLow-level guidance: none").failed);
    CHECK_FALSE(parse_cot_response("Failure detection: No failure.\nLow-level guidance: Hold the left arm still.").failed);
  }

  TEST_CASE("failure without a known command") {
    CHECK_THROWS_AS(parse_cot_response("Failure detection: The robot fails.\nLow-level guidance: wiggle a bit."),
                    ResponseParseError);
  }

  TEST_CASE("failure with a malformed symbol block") {
    CHECK_THROWS_AS(parse_cot_response("Failure detection: fails.\nLow-level guidance: Hold the left arm still.\n"
                                       "```symbols\nframe=0 purpose=correction\ncrosshair(start=(1,\n```"),
                    ResponseParseError);
  }
}

TEST_SUITE("history window") {
  TEST_CASE("five frames from a 20 s stream at 10 fps") {
    std::vector<double> ts;
    for (int i = 0; i <= 200; ++i) ts.push_back(i / 10.0);
    const auto chosen = select_history(ts, 20.0, 5.0, 1.0);
    CHECK(chosen == std::vector<double>{16.0, 17.0, 18.0, 19.0, 20.0});
  }

  TEST_CASE("short stream attaches what exists") {
    const auto chosen = select_history({0.0, 0.5, 1.0, 1.5}, 1.5, 5.0, 1.0);
    CHECK(chosen == std::vector<double>{0.5, 1.5});
  }

  TEST_CASE("matches a brute-force scan") {
    Rng rng(2);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<double> ts;
      double t = 0;
      const int n = 1 + static_cast<int>(rng.below(80));
      for (int i = 0; i < n; ++i) {
        t += 0.05 * static_cast<double>(1 + rng.below(20));
        ts.push_back(std::round(t * 100) / 100);
      }
      const double now = ts.back();
      const double window = 1.0 + static_cast<double>(rng.below(8));
      const double fps = rng.below(2) ? 1.0 : 2.0;
      std::vector<double> expected;
      for (int k = 0; now - k / fps > now - window + 1e-9; ++k) {
        const double target = now - k / fps;
        double pick = -1;
        for (double x : ts) {
          if (x <= target + 1e-9 && x > now - window + 1e-9) pick = x;
        }
        if (pick >= 0 && std::find(expected.begin(), expected.end(), pick) == expected.end()) {
          expected.push_back(pick);
        }
      }
      std::sort(expected.begin(), expected.end());
      const auto chosen = select_history(ts, now, window, fps);
      REQUIRE(chosen == expected);
      CHECK(chosen.size() <= static_cast<std::size_t>(window * fps));
    }
  }
}

TEST_SUITE("vsf mask") {
  TEST_CASE("margin of 50 px") {
    CHECK(expand_roi({100, 100, 200, 150}, {640, 480}) == Rect{50, 50, 250, 200});
  }

  TEST_CASE("clamped at the frame edge") {
    const auto r = expand_roi({0, 0, 10, 10}, {640, 480});
    CHECK(r == Rect{0, 0, 60, 60});
    CHECK(r.width() >= 50);
    CHECK(r.height() >= 50);
    CHECK(expand_roi({600, 450, 639, 479}, {640, 480}) == Rect{550, 400, 639, 479});
  }

  TEST_CASE("agrees with the search-based reference") {
    Rng rng(31);
    for (int i = 0; i < 2000; ++i) {
      const int w = 50 + static_cast<int>(rng.below(300));
      const int h = 50 + static_cast<int>(rng.below(300));
      const int x0 = static_cast<int>(rng.below(w)), x1 = x0 + static_cast<int>(rng.below(w - x0));
      const int y0 = static_cast<int>(rng.below(h)), y1 = y0 + static_cast<int>(rng.below(h - y0));
      const auto r = expand_roi({x0, y0, x1, y1}, {w, h});
      const auto [ex0, ex1] = roi_axis_oracle(x0, x1, w);
      const auto [ey0, ey1] = roi_axis_oracle(y0, y1, h);
      REQUIRE(r == Rect{ex0, ey0, ex1, ey1});
    }
  }

  TEST_CASE("frame smaller than the minimum") {
    CHECK_THROWS_AS(expand_roi({0, 0, 5, 5}, {40, 480}), InvalidArgument);
  }

  TEST_CASE("wrist masks follow the guided arm") {
    symbols::SymbolSet set;
    symbols::SymbolInstance s;
    s.kind = symbols::SymbolKind::Crosshair;
    s.start = {300, 200};
    set.symbols.push_back(s);
    const auto left = build_vsf_mask(set, {640, 480}, Arm::Left);
    CHECK(left.left_wrist == WristMask::Keep);
    CHECK(left.right_wrist == WristMask::ZeroAll);
    const auto right = build_vsf_mask(set, {640, 480}, Arm::Right);
    CHECK(right.left_wrist == WristMask::ZeroAll);
    CHECK(right.right_wrist == WristMask::Keep);
    const auto none = build_vsf_mask(set, {640, 480}, Arm::None);
    CHECK(none.left_wrist == WristMask::ZeroAll);
    CHECK(none.right_wrist == WristMask::ZeroAll);
    CHECK(left.head_roi == expand_roi(symbols::symbol_bbox(set), {640, 480}));
  }

  TEST_CASE("empty set") { CHECK_THROWS_AS(build_vsf_mask({}, {640, 480}, Arm::Left), EmptySetError); }
}

TEST_SUITE("apply mask") {
  TEST_CASE("full-frame roi is the identity") {
    Rng rng(1);
    ObservationFrames f;
    f.head = noise(rng, 64, 48);
    f.left_wrist = noise(rng, 32, 24);
    const auto out = apply_mask(f, {{0, 0, 63, 47}, WristMask::Keep, WristMask::Keep});
    CHECK(out == f);
  }

  TEST_CASE("corner kept, one pixel outside zeroed") {
    Rng rng(2);
    ObservationFrames f;
    f.head = noise(rng, 100, 80);
    const MaskSpec m{{10, 20, 59, 69}, WristMask::Keep, WristMask::Keep};
    const auto out = apply_mask(f, m).head;
    for (auto [x, y] : {std::pair{10, 20}, {59, 20}, {10, 69}, {59, 69}}) CHECK(out.at(x, y) == f.head.at(x, y));
    for (auto [x, y] : {std::pair{9, 20}, {10, 19}, {60, 69}, {59, 70}}) CHECK(out.at(x, y) == Rgb{0, 0, 0});
  }

  TEST_CASE("zeroes exactly the outside pixels") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      ObservationFrames f;
      f.head = noise(rng, 60 + static_cast<int>(rng.below(60)), 50 + static_cast<int>(rng.below(60)));
      const int x0 = static_cast<int>(rng.below(f.head.width)), y0 = static_cast<int>(rng.below(f.head.height));
      const Rect r{x0, y0, x0 + static_cast<int>(rng.below(f.head.width - x0)),
                   y0 + static_cast<int>(rng.below(f.head.height - y0))};
      const auto out = apply_mask(f, {r, WristMask::Keep, WristMask::Keep}).head;
      for (int y = 0; y < f.head.height; ++y) {
        for (int x = 0; x < f.head.width; ++x) {
          const bool inside = r.contains(symbols::Point{x, y});
          REQUIRE(out.at(x, y) == (inside ? f.head.at(x, y) : Rgb{0, 0, 0}));
        }
      }
    }
  }

  TEST_CASE("zeroed wrist view keeps its size") {
    Rng rng(4);
    ObservationFrames f;
    f.head = noise(rng, 64, 48);
    f.right_wrist = noise(rng, 30, 20);
    const auto out = apply_mask(f, {{0, 0, 63, 47}, WristMask::Keep, WristMask::ZeroAll});
    REQUIRE(out.right_wrist.has_value());
    CHECK(*out.right_wrist == Image(30, 20));
  }

  TEST_CASE("roi outside the frame") {
    ObservationFrames f;
    f.head = Image(64, 48);
    CHECK_THROWS_AS(apply_mask(f, {{0, 0, 64, 47}, WristMask::Keep, WristMask::Keep}), DimensionMismatch);
  }

  TEST_CASE("overlay and mask commute for generated VSF commands") {
    Rng rng(5);
    for (int trial = 0; trial < 60; ++trial) {
      auto set = testing::random_symbol_set(rng, 320, 240);
      if (set.symbols.empty()) continue;
      ObservationFrames f;
      f.head = noise(rng, 320, 240);
      const auto mask = build_vsf_mask(set, {320, 240}, Arm::Left);
      ObservationFrames overlaid = f;
      overlaid.head = symbols::render_overlay(f.head, set);
      const auto a = apply_mask(overlaid, mask).head;
      const auto b = symbols::render_overlay(apply_mask(f, mask).head, set);
      REQUIRE(a == b);
    }
  }
}

TEST_SUITE("pmc target") {
  symbols::SymbolInstance sym(symbols::SymbolKind kind, int x, int y) {
    symbols::SymbolInstance s;
    s.kind = kind;
    s.start = {x, y};
    return s;
  }

  TEST_CASE("single crosshair") {
    symbols::SymbolSet set;
    set.symbols.push_back(sym(symbols::SymbolKind::Crosshair, 321, 144));
    const auto t = build_pmc_command(set, true);
    CHECK(t.point == symbols::Point{321, 144});
    CHECK(t.grasp_requested);
  }

  TEST_CASE("crosshair beats arrow, dual crosshairs beat both") {
    symbols::SymbolSet set;
    auto arrow = sym(symbols::SymbolKind::StraightArrow, 10, 10);
    arrow.end = symbols::Point{50, 10};
    arrow.color = symbols::AxisColor::Green;
    set.symbols.push_back(arrow);
    set.symbols.push_back(sym(symbols::SymbolKind::Crosshair, 321, 144));
    CHECK(build_pmc_command(set, false).point == symbols::Point{321, 144});
    auto dual = sym(symbols::SymbolKind::DualCrosshairs, 100, 100);
    dual.end = symbols::Point{200, 120};
    set.symbols.push_back(dual);
    CHECK(build_pmc_command(set, false).point == symbols::Point{200, 120});
  }

  TEST_CASE("no target") {
    symbols::SymbolSet set;
    set.symbols.push_back(sym(symbols::SymbolKind::ProhibitionIcon, 50, 50));
    CHECK_THROWS_AS(build_pmc_command(set, false), NoTargetError);
  }

  TEST_CASE("PMC without a target falls back to holding still") {
    DiagnosisResponse d;
    d.failed = true;
    d.low_level_commands.push_back({Arm::Right, annotation::Verb::OpenGripper, {}, {}, {}});
    symbols::SymbolSet set;
    auto p = sym(symbols::SymbolKind::ProhibitionIcon, 50, 50);
    p.arm = Arm::Right;
    set.symbols.push_back(p);
    d.symbol_set = set;
    const auto c = make_correction(d, Image(160, 120), CorrectionMode::Pmc);
    CHECK(c.hold_still_fallback);
    CHECK_FALSE(c.pmc_target.has_value());
    CHECK(c.textual_prompt == "Hold the right arm still");
    CHECK_NOTHROW(check_command(c));
  }

  TEST_CASE("correction commands carry exactly one of mask and target") {
    const auto d = parse_cot_response(kFailureReply);
    Rng rng(6);
    const auto head = noise(rng, 640, 480);
    const auto vsf = make_correction(d, head, CorrectionMode::Vsf);
    CHECK(vsf.mask.has_value());
    CHECK_FALSE(vsf.pmc_target.has_value());
    CHECK(vsf.mask->right_wrist == WristMask::Keep);
    CHECK(vsf.overlay_frame == symbols::render_overlay(head, *d.symbol_set));
    CHECK(vsf.textual_prompt == "Move the right gripper upward significantly; Close the right gripper");
    const auto pmc = make_correction(d, head, CorrectionMode::Pmc);
    CHECK_FALSE(pmc.mask.has_value());
    REQUIRE(pmc.pmc_target.has_value());
    CHECK(pmc.pmc_target->point == symbols::Point{300, 200});
    CHECK(pmc.pmc_target->grasp_requested);
    CHECK_NOTHROW(check_command(vsf));
    CHECK_NOTHROW(check_command(pmc));
  }
}

TEST_SUITE("session") {
  TEST_CASE("60 chunks at interval 6 give 10 requests of at most 5 frames") {
    ScriptedAdapter adapter(named_scenario("nominal"));
    std::vector<std::size_t> counts;
    auto vlm = scripted_vlm(&counts);
    const auto log = run_session(config(), adapter, vlm, fixed_options());
    CHECK(log.summary.status == "task_done");
    CHECK(log.summary.diagnosis_requests == 10);
    REQUIRE(counts.size() == 10);
    for (auto n : counts) CHECK(n <= 5);
    CHECK(counts.back() == 5);
    CHECK(log.summary.corrections == 0);
    CHECK(adapter.delivered().empty());
  }

  TEST_CASE("request count is ceil(steps / interval)") {
    for (int steps = 1; steps <= 40; ++steps) {
      ScriptedAdapter adapter(named_scenario("nominal"));
      auto vlm = scripted_vlm();
      const auto log = run_session(config(), adapter, vlm, fixed_options(steps));
      CHECK(log.summary.status == "max_steps");
      CHECK(log.summary.diagnosis_requests == (steps + 5) / 6);
    }
  }

  TEST_CASE("no-failure reply keeps monitoring") {
    ScriptedAdapter adapter(named_scenario("nominal"));
    auto vlm = scripted_vlm();
    const auto log = run_session(config(), adapter, vlm, fixed_options(1));
    CHECK(transitions(log) == std::vector<std::string>{"monitoring->diagnosing", "diagnosing->monitoring"});
    CHECK(log.steps.at(0).state_after == SessionState::Monitoring);
  }

  TEST_CASE("failure then recovery: one correction and a replayable log") {
    testing::TempDir tmp;
    ScriptedAdapter adapter(named_scenario("fail_then_recover"));
    auto vlm = scripted_vlm();
    const auto log = run_session(config(), adapter, vlm, fixed_options());
    CHECK(log.summary.corrections == 1);
    CHECK(log.summary.correcting_entered == 1);
    CHECK(adapter.delivered().size() == 1);
    const auto t = transitions(log);
    CHECK(std::count(t.begin(), t.end(), "diagnosing->correcting") == 1);
    CHECK(std::count(t.begin(), t.end(), "correcting->diagnosing") == 1);
    CHECK(log.steps.back().state_after == SessionState::Monitoring);
    CHECK_NOTHROW(check_command(adapter.delivered()[0]));

    write_session_log(tmp / "session.jsonl", log);
    const auto back = read_session_log(tmp / "session.jsonl");
    CHECK(back == log);
    ReplayEndpoint replay(back);
    ScriptedAdapter again(named_scenario("fail_then_recover"));
    const auto replayed = run_session(config(), again, replay, fixed_options());
    CHECK(replay.remaining() == 0);
    CHECK(transitions(replayed) == t);
    CHECK(replayed == log);
  }

  TEST_CASE("adapter fault aborts with a partial log") {
    ScriptedAdapter adapter(named_scenario("adapter_fault"));
    auto vlm = scripted_vlm();
    const auto log = run_session(config(), adapter, vlm, fixed_options());
    CHECK(log.aborted());
    CHECK(log.size() == 3);
    CHECK(log.summary.error.find("step 3") != std::string::npos);
  }

  TEST_CASE("endpoint errors are logged and polling continues") {
    ScriptedAdapter adapter(named_scenario("nominal"));
    int calls = 0;
    endpoint::CallbackEndpoint vlm([&](const endpoint::ChatRequest& req) -> std::string {
      if (++calls % 2 == 1) throw EndpointError("timeout");
      return scripted_vlm_reply(req);
    });
    const auto log = run_session(config(), adapter, vlm, fixed_options());
    CHECK(log.summary.status == "task_done");
    CHECK(log.summary.diagnosis_requests == 10);
    CHECK(log.summary.endpoint_errors == 5);
    for (const auto& s : log.steps) CHECK(s.state_after == SessionState::Monitoring);
  }

  TEST_CASE("unparseable diagnosis is counted and ignored") {
    ScriptedAdapter adapter(named_scenario("nominal"));
    endpoint::CallbackEndpoint vlm([](const endpoint::ChatRequest&) {
      return std::string("Failure detection: The robot fails.\nLow-level guidance: do something.");
    });
    const auto log = run_session(config(), adapter, vlm, fixed_options(13));
    CHECK(log.summary.parse_errors == 3);
    CHECK(log.summary.corrections == 0);
    CHECK(adapter.delivered().empty());
  }

  TEST_CASE("PMC session targets the crosshair") {
    ScriptedAdapter adapter(named_scenario("fail_then_recover"));
    auto vlm = scripted_vlm();
    FixedGraspEstimator grasp;
    auto opts = fixed_options();
    opts.grasp_estimator = &grasp;
    const auto log = run_session(config(CorrectionMode::Pmc), adapter, vlm, opts);
    REQUIRE(adapter.delivered().size() == 1);
    const auto& c = adapter.delivered()[0];
    REQUIRE(c.pmc_target.has_value());
    CHECK(c.pmc_target->point == symbols::Point{80 + 20, 60});
    CHECK_FALSE(c.pmc_target->grasp_requested);
    CHECK(log.summary.corrections == 1);
  }

  TEST_CASE("requests are spaced by at least the interval for uneven chunk counts") {
    class Jumpy : public EnvironmentAdapter {
     public:
      explicit Jumpy(std::uint64_t seed) : rng_(seed) {}
      Observation next_observation() override {
        counter_ += static_cast<std::int64_t>(rng_.below(4));
        Observation o;
        o.timestamp_s = static_cast<double>(n_++) * 0.3;
        o.frames.head = Image(80, 60, {40, 160, 40});
        return o;
      }
      std::int64_t chunk_counter() override { return counter_; }
      void deliver(const CorrectionCommand&) override {}
      bool task_done() override { return n_ >= 200; }

     private:
      Rng rng_;
      std::int64_t counter_ = 0;
      std::int64_t n_ = 0;
    };
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Jumpy adapter(seed);
      auto vlm = scripted_vlm();
      auto cfg = config();
      cfg.query_interval_chunks = 1 + static_cast<int>(seed);
      const auto log = run_session(cfg, adapter, vlm, fixed_options());
      std::vector<std::int64_t> polled;
      for (const auto& s : log.steps) {
        for (const auto& e : s.events) {
          if (e.at("type") == "request") polled.push_back(s.chunk_counter);
        }
      }
      REQUIRE(polled.size() > 2);
      for (std::size_t i = 1; i < polled.size(); ++i) CHECK(polled[i] - polled[i - 1] >= cfg.query_interval_chunks);
    }
  }

  TEST_CASE("stop token ends the session") {
    std::stop_source src;
    src.request_stop();
    ScriptedAdapter adapter(named_scenario("nominal"));
    auto vlm = scripted_vlm();
    auto opts = fixed_options();
    opts.stop = src.get_token();
    const auto log = run_session(config(), adapter, vlm, opts);
    CHECK(log.summary.status == "stopped");
    CHECK(log.size() == 0);
  }
}

TEST_SUITE("supervisor config") {
  TEST_CASE("defaults and json round trip") {
    SupervisorConfig c;
    CHECK(c.query_interval_chunks == 6);
    CHECK(c.history_window_s == 5.0);
    CHECK(c.history_fps == 1.0);
    c.mode = CorrectionMode::Pmc;
    c.task_instruction = "x";
    CHECK(supervisor_config_from_json(to_json(c)) == c);
  }

  TEST_CASE("invalid values") {
    CHECK_THROWS_AS(supervisor_config_from_json({{"query_interval_chunks", 0}}), InvalidArgument);
    CHECK_THROWS_AS(supervisor_config_from_json({{"history_window_s", 0}}), InvalidArgument);
    CHECK_THROWS_AS(supervisor_config_from_json({{"mode", "other"}}), InvalidArgument);
  }
}
