#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "support/eval_mocks.hpp"
#include "support/fixtures.hpp"
#include "support/mock_server.hpp"
#include "symguide/common/errors.hpp"
#include "symguide/endpoint/http_client.hpp"
#include "symguide/eval/harness.hpp"
#include "symguide/symbols/codec.hpp"

using namespace symguide;
using namespace symguide::eval;
using vqa::QuestionType;

namespace {

const std::vector<std::string> kFour{"Task planning", "Gripper 6D pose", "Gripper state",
                                     "Human intervention"};

const char* kTruthCode =
    "frame=3 purpose=correction\n"
    "straight_arrow(arm=left, color=green, start=(100,100), end=(200,100), mag=significant)\n"
    "crosshair(arm=left, start=(321,144))\n";

symbols::SymbolSet truth_set() { return symbols::parse_symbol_code(kTruthCode); }

ItemResult item(const std::string& id, QuestionType type, double score) {
  ItemResult r;
  r.pair_id = id;
  r.question_type = type;
  r.score = score;
  r.correct = score > 0;
  return r;
}

std::string report_text(const EvalReport& r) { return to_json(r).dump(); }

}  // namespace

TEST_SUITE("choice extraction") {
  TEST_CASE("standalone letter") {
    CHECK(extract_choice("The answer is B.", kFour) == 'B');
    CHECK(extract_choice("(C)", kFour) == 'C');
    CHECK(extract_choice("D", kFour) == 'D');
  }

  TEST_CASE("first standalone letter wins") { CHECK(extract_choice("It could be A or B", kFour) == 'A'); }

  TEST_CASE("letters inside words and out of range are ignored") {
    CHECK_FALSE(extract_choice("Both are wrong", kFour).has_value());
    CHECK_FALSE(extract_choice("Option E", kFour).has_value());
    const std::vector<std::string> two{"Yes", "No"};
    CHECK_FALSE(extract_choice("C", two).has_value());
  }

  TEST_CASE("verbatim option text") {
    CHECK(extract_choice("it is clearly Gripper state here", kFour) == 'C');
    CHECK_FALSE(extract_choice("it is clearly gripper state here", kFour).has_value());
  }

  TEST_CASE("longest verbatim option wins") {
    const std::vector<std::string> opts{"Lift the cube", "Lift the cube onto the plate", "x", "y"};
    CHECK(extract_choice("the robot should lift the cube onto the plate... Lift the cube onto the plate", opts) == 'B');
  }

  TEST_CASE("no match is unparseable") { CHECK_FALSE(extract_choice("no idea", kFour).has_value()); }
}

TEST_SUITE("judge") {
  TEST_CASE("total is the plain mean") {
    const auto s = parse_judge_response(
        R"({"semantic_similarity": 60, "content_completeness": 90, "functional_equivalence": 30})", 100);
    CHECK(s.total == 60.0);
    CHECK(s.semantic_similarity == 60.0);
  }

  TEST_CASE("total matches the dimension mean for arbitrary scores") {
    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
      const double a = rng.below(10001) / 100.0, b = rng.below(10001) / 100.0, c = rng.below(10001) / 100.0;
      const auto s = make_judge_score(a, b, c);
      CHECK(s.total == (a + b + c) / 3.0);
    }
  }

  TEST_CASE("ten-point scale is normalized") {
    const auto s = parse_judge_response("semantic similarity: 6\ncontent completeness: 9\nfunctional equivalence: 3", 10);
    CHECK(s.semantic_similarity == doctest::Approx(60.0));
    CHECK(s.content_completeness == doctest::Approx(90.0));
    CHECK(s.total == doctest::Approx(60.0));
  }

  TEST_CASE("missing or out of range dimension") {
    CHECK_THROWS_AS(parse_judge_response("great answer", 100), JudgeParseError);
    CHECK_THROWS_AS(parse_judge_response(
                        R"({"semantic_similarity": 160, "content_completeness": 90, "functional_equivalence": 30})", 100),
                    JudgeParseError);
  }

  TEST_CASE("json round trip") {
    const auto s = make_judge_score(10, 20, 33.5, "raw");
    CHECK(judge_score_from_json(to_json(s)) == s);
  }
}

TEST_SUITE("symbol scoring") {
  const symbols::FrameDims vga{640, 480};

  TEST_CASE("identity matches") {
    const auto s = score_symbol_code(symbols::emit_symbol_code(truth_set()), truth_set(), vga);
    CHECK(s.match);
    CHECK(s.reason == SymbolMatchReason::Match);
    CHECK(s.max_point_error == 0.0);
  }

  TEST_CASE("tolerance is a tenth of the diagonal") {
    const double diag = std::sqrt(640.0 * 640.0 + 480.0 * 480.0);
    const auto s = score_symbol_code(kTruthCode, truth_set(), vga);
    CHECK(s.tolerance == doctest::Approx(diag / 10.0));
    CHECK(s.tolerance == doctest::Approx(80.0));
  }

  TEST_CASE("small endpoint shift still matches") {
    std::string code = kTruthCode;
    code.replace(code.find("end=(200,100)"), 13, "end=(205,100)");
    const auto s = score_symbol_code(code, truth_set(), vga);
    CHECK(s.match);
    CHECK(s.max_point_error == doctest::Approx(5.0));
  }

  TEST_CASE("boundary of the tolerance") {
    std::string at = kTruthCode, past = kTruthCode;
    at.replace(at.find("end=(200,100)"), 13, "end=(280,100)");
    past.replace(past.find("end=(200,100)"), 13, "end=(281,100)");
    CHECK(score_symbol_code(at, truth_set(), vga).match);
    const auto s = score_symbol_code(past, truth_set(), vga);
    CHECK_FALSE(s.match);
    CHECK(s.reason == SymbolMatchReason::PointError);
  }

  TEST_CASE("wrong color is an attribute mismatch") {
    std::string code = kTruthCode;
    code.replace(code.find("color=green"), 11, "color=red");
    const auto s = score_symbol_code(code, truth_set(), vga);
    CHECK_FALSE(s.match);
    CHECK(s.reason == SymbolMatchReason::AttributeMismatch);
  }

  TEST_CASE("wrong arm is an attribute mismatch") {
    std::string code = kTruthCode;
    code.replace(code.find("crosshair(arm=left"), 18, "crosshair(arm=right");
    CHECK(score_symbol_code(code, truth_set(), vga).reason == SymbolMatchReason::AttributeMismatch);
  }

  TEST_CASE("kind multiset differs") {
    const std::string code =
        "frame=3 purpose=correction\n"
        "straight_arrow(arm=left, color=green, start=(100,100), end=(200,100), mag=significant)\n"
        "dual_crosshairs(arm=left, start=(321,144), end=(330,150))\n";
    CHECK(score_symbol_code(code, truth_set(), vga).reason == SymbolMatchReason::KindMismatch);
    const std::string fewer =
        "frame=3 purpose=correction\n"
        "crosshair(arm=left, start=(321,144))\n";
    CHECK(score_symbol_code(fewer, truth_set(), vga).reason == SymbolMatchReason::KindMismatch);
  }

  TEST_CASE("garbage is a parse failure") {
    const auto s = score_symbol_code("I would move the arm left.", truth_set(), vga);
    CHECK_FALSE(s.match);
    CHECK(s.reason == SymbolMatchReason::ParseFail);
  }

  TEST_CASE("code embedded in prose and in any symbol order") {
    const std::string reply =
        "Here is the guidance:\n```\nframe=3 purpose=correction\n"
        "crosshair(arm=left, start=(320,146))\n"
        "straight_arrow(arm=left, color=green, start=(102,99), end=(198,101), mag=significant)\n```\n";
    CHECK(score_symbol_code(reply, truth_set(), vga).match);
  }

  TEST_CASE("assignment pairs same-kind symbols by distance") {
    const auto truth = symbols::parse_symbol_code(
        "frame=0 purpose=correction\n"
        "crosshair(arm=left, start=(10,10))\n"
        "crosshair(arm=left, start=(600,400))\n");
    // Listed in swapped order; the greedy first-come pairing would be off by
    // hundreds of pixels, the minimum-cost one by 3.
    const auto s = score_symbol_code(
        "frame=0 purpose=correction\ncrosshair(arm=left, start=(603,400))\ncrosshair(arm=left, start=(10,12))\n",
        truth, vga);
    CHECK(s.match);
    CHECK(s.max_point_error == doctest::Approx(3.0));
  }

  TEST_CASE("random sets score themselves as matches") {
    Rng rng(99);
    for (int i = 0; i < 300; ++i) {
      const auto set = testing::random_symbol_set(rng, 640, 480);
      if (set.symbols.empty()) continue;
      auto shuffled = set;
      rng.shuffle(shuffled.symbols);
      const auto s = score_symbol_code(symbols::emit_symbol_code(shuffled), set, vga);
      REQUIRE_MESSAGE(s.match, s.detail);
    }
  }
}

TEST_SUITE("eval runs") {
  TEST_CASE("oracle endpoint scores everything") {
    const auto pairs = testing::synthetic_benchmark(5, 60, 6);
    REQUIRE(pairs.size() >= 500);
    auto model = testing::oracle_endpoint(pairs);
    auto judge = testing::exact_match_judge();
    const auto items = run_benchmark(pairs, model, judge, testing::id_media());
    REQUIRE(items.size() == pairs.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      CHECK(items[i].pair_id == pairs[i].id);
      REQUIRE_MESSAGE(items[i].correct, items[i].pair_id << " " << items[i].error);
    }
    const auto report = aggregate_report(items);
    CHECK(*report.lite_average == 100.0);
    CHECK(*report.hard_average == 100.0);
    CHECK(*report.visual_match_rate == 100.0);
    CHECK(report.per_type.size() == std::size(vqa::kBenchmarkTypes) + 1);
  }

  TEST_CASE("fixed wrong letter scores zero") {
    auto pairs = testing::four_option_pairs(3, 200);
    for (auto& p : pairs) {
      if (p.answer == "D") p.answer = "A";
    }
    endpoint::CallbackEndpoint model([](const endpoint::ChatRequest&) { return std::string("D"); });
    const auto items = run_closed_eval(pairs, model, testing::id_media());
    CHECK(aggregate_report(items).per_type.at("failure_type_identification").accuracy == 0.0);
  }

  TEST_CASE("uniform random guessing lands near a quarter") {
    const auto pairs = testing::four_option_pairs(11, 10000);
    auto model = testing::random_letter_endpoint(12);
    const auto items = run_closed_eval(pairs, model, testing::id_media());
    const double acc = aggregate_report(items).per_type.at("failure_type_identification").accuracy;
    // Binomial sd at n=10000, p=0.25 is 0.433 points; 2 points is over 4 sd.
    CHECK(acc >= 23.0);
    CHECK(acc <= 27.0);
  }

  TEST_CASE("endpoint errors count against accuracy") {
    const auto pairs = testing::four_option_pairs(3, 4);
    endpoint::CallbackEndpoint model([&](const endpoint::ChatRequest& req) -> std::string {
      const auto id = testing::pair_id_of(req);
      if (id == pairs[0].id) throw EndpointError("down");
      for (const auto& p : pairs) {
        if (p.id == id) return p.answer;
      }
      return "";
    });
    const auto items = run_closed_eval(pairs, model, testing::id_media());
    CHECK(items[0].errored);
    CHECK(items[0].error.find("down") != std::string::npos);
    const auto report = aggregate_report(items);
    CHECK(report.per_type.at("failure_type_identification").accuracy == 75.0);
    CHECK(report.errored_items == 1);
  }

  TEST_CASE("mock judge scores feed the open-ended accuracy") {
    vqa::VqaPair p;
    p.id = "t/failure_reason";
    p.question_type = QuestionType::FailureReason;
    p.prompt = "Why did it fail?";
    p.answer_text = "The gripper missed.";
    endpoint::CallbackEndpoint model([](const endpoint::ChatRequest&) { return std::string("It missed."); });
    auto judge = testing::fixed_judge(60, 90, 30);
    const auto items = run_open_eval({p}, model, judge, no_media());
    REQUIRE(items[0].judge.has_value());
    CHECK(items[0].judge->total == 60.0);
    CHECK(items[0].score == 60.0);
    CHECK(aggregate_report(items).hard_average == 60.0);
  }

  TEST_CASE("malformed judge reply is retried once with a reminder") {
    vqa::VqaPair p;
    p.id = "t/failure_reason";
    p.question_type = QuestionType::FailureReason;
    p.answer_text = "ref";
    endpoint::CallbackEndpoint model([](const endpoint::ChatRequest&) { return std::string("ans"); });
    std::vector<std::string> prompts;
    endpoint::CallbackEndpoint judge([&](const endpoint::ChatRequest& req) {
      prompts.push_back(req.messages.at(0).text);
      return prompts.size() == 1 ? std::string("looks fine")
                                 : std::string(R"({"semantic_similarity": 50, "content_completeness": 50, "functional_equivalence": 80})");
    });
    const auto items = run_open_eval({p}, model, judge, no_media());
    REQUIRE(prompts.size() == 2);
    CHECK(prompts[1].find(judge_format_reminder()) != std::string::npos);
    CHECK_FALSE(items[0].flagged);
    CHECK(items[0].score == 60.0);
  }

  TEST_CASE("malformed judge reply twice flags the item and the run continues") {
    std::vector<vqa::VqaPair> pairs(2);
    pairs[0].id = "a/failure_reason";
    pairs[1].id = "b/failure_reason";
    for (auto& p : pairs) {
      p.question_type = QuestionType::FailureReason;
      p.answer_text = "ref";
    }
    endpoint::CallbackEndpoint model([](const endpoint::ChatRequest& req) {
      return std::string(testing::pair_id_of(req));
    });
    std::atomic<int> calls{0};
    endpoint::CallbackEndpoint judge([&](const endpoint::ChatRequest& req) {
      ++calls;
      if (req.messages.at(0).text.find("a/failure_reason") != std::string::npos) return std::string("???");
      return std::string(R"({"semantic_similarity": 90, "content_completeness": 90, "functional_equivalence": 90})");
    });
    const auto items = run_open_eval(pairs, model, judge, testing::id_media());
    CHECK(calls == 3);
    CHECK(items[0].flagged);
    CHECK_FALSE(items[1].flagged);
    const auto report = aggregate_report(items);
    CHECK(report.flagged_items == 1);
    CHECK(report.per_type.at("failure_reason").scored == 1);
    CHECK(report.per_type.at("failure_reason").accuracy == 90.0);
  }

  TEST_CASE("requests carry temperature 0 and 2048 max tokens") {
    const auto pairs = testing::synthetic_benchmark(8, 6, 3);
    testing::MockChatServer server([](const nlohmann::json&) {
      return testing::MockChatServer::Reply{200, testing::MockChatServer::completion("A"), {}};
    });
    endpoint::ModelEndpointConfig cfg;
    cfg.base_url = server.base_url();
    cfg.model_name = "m";
    endpoint::HttpChatClient client(cfg, [](double) {});
    auto judge = testing::fixed_judge(50, 50, 50);
    const auto items = run_benchmark(pairs, client, judge, no_media());
    const auto requests = server.requests();
    REQUIRE(requests.size() == pairs.size());
    for (const auto& r : requests) {
      CHECK(r.at("temperature").get<double>() == 0.0);
      CHECK(r.at("max_tokens").get<int>() == 2048);
    }
  }
}

TEST_SUITE("report aggregation") {
  TEST_CASE("overall is the mean of the split averages") {
    const std::vector<ItemResult> items{item("a", QuestionType::FailureDetection, 93.70),
                                        item("b", QuestionType::FailureReason, 72.64)};
    const auto r = aggregate_report(items);
    CHECK(*r.lite_average == doctest::Approx(93.70));
    CHECK(*r.hard_average == doctest::Approx(72.64));
    CHECK(*r.overall_average == doctest::Approx(83.17));
  }

  TEST_CASE("split averages are unweighted over types; item-weighted mean is reported too") {
    const std::vector<ItemResult> items{item("a1", QuestionType::FailureDetection, 100),
                                        item("a2", QuestionType::FailureDetection, 100),
                                        item("a3", QuestionType::FailureDetection, 100),
                                        item("b1", QuestionType::FailureTypeId, 0),
                                        item("c1", QuestionType::FailureReason, 40)};
    const auto r = aggregate_report(items);
    CHECK(*r.lite_average == 50.0);
    CHECK(*r.hard_average == 40.0);
    CHECK(*r.overall_average == 45.0);
    CHECK(*r.item_weighted_average == doctest::Approx(340.0 / 5.0));
  }

  TEST_CASE("single correct item") {
    const auto r = aggregate_report({item("x", QuestionType::FailureSubtaskLoc, 100)});
    CHECK(r.per_type.at("failure_subtask_localization").accuracy == 100.0);
    CHECK(*r.lite_average == 100.0);
    CHECK_FALSE(r.hard_average.has_value());
    CHECK(*r.overall_average == 100.0);
  }

  TEST_CASE("nothing scored") {
    CHECK_THROWS_AS(aggregate_report({}), EmptyResults);
    auto flagged = item("f", QuestionType::FailureReason, 0);
    flagged.flagged = true;
    CHECK_THROWS_AS(aggregate_report({flagged}), EmptyResults);
  }

  TEST_CASE("order does not change the report") {
    Rng rng(4);
    std::vector<ItemResult> items;
    for (int i = 0; i < 400; ++i) {
      const auto type = vqa::kAllQuestionTypes[rng.below(std::size(vqa::kAllQuestionTypes))];
      items.push_back(item("p" + std::to_string(i), type, rng.below(100001) / 1000.0));
    }
    const auto expected = report_text(aggregate_report(items));
    for (int k = 0; k < 20; ++k) {
      rng.shuffle(items);
      CHECK(report_text(aggregate_report(items)) == expected);
    }
  }

  TEST_CASE("persisted items reproduce the report exactly") {
    testing::TempDir tmp;
    const auto pairs = testing::synthetic_benchmark(21, 12, 4);
    Rng rng(5);
    endpoint::CallbackEndpoint model([&](const endpoint::ChatRequest&) {
      return std::string("B, maybe");
    });
    endpoint::CallbackEndpoint judge([](const endpoint::ChatRequest& req) {
      const auto h = std::hash<std::string>{}(req.messages.at(0).text);
      return "{\"semantic_similarity\": " + std::to_string(h % 97) + ".25, \"content_completeness\": " +
             std::to_string(h % 89) + ".5, \"functional_equivalence\": " + std::to_string(h % 83) + "}";
    });
    const auto items = run_benchmark(pairs, model, judge, no_media());
    const auto report = aggregate_report(items);
    write_eval_run(tmp.path(), items, report, {{"seed", 21}});
    const auto back = read_items_jsonl(tmp.path() / "items.jsonl");
    CHECK(back.size() == items.size());
    CHECK(report_text(recompute_report(tmp.path())) == report_text(report));
    std::ifstream in(tmp.path() / "report.json");
    const auto doc = nlohmann::json::parse(in);
    CHECK(doc.at("report").dump() == to_json(report).dump());
    CHECK(doc.at("run").at("seed") == 21);
    CHECK(std::filesystem::exists(tmp.path() / "report.txt"));
  }

  TEST_CASE("item json round trip") {
    auto r = item("x", QuestionType::FailureReason, 55.5);
    r.judge = make_judge_score(50, 55, 61.5, "raw");
    r.response = "resp";
    CHECK(item_result_from_json(to_json(r)) == r);
    auto c = item("y", QuestionType::FailureDetection, 100);
    c.extracted = 'A';
    CHECK(item_result_from_json(to_json(c)) == c);
  }
}
