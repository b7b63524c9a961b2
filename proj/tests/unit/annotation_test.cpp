#include <set>

#include "doctest.h"
#include "support/annotation_fixture.hpp"
#include "symguide/common/errors.hpp"
#include "symguide/common/hashing.hpp"
#include "symguide/symbols/codec.hpp"
#include "symguide/symbols/image.hpp"
#include "symguide/symbols/render.hpp"

using namespace symguide;
using namespace symguide::annotation;
using symguide::testing::AnnotationFixture;
using symbols::Arm;
using symbols::SetPurpose;

TEST_SUITE("low-level commands") {
  TEST_CASE("rendering") {
    CHECK(render_command(AnnotationFixture::move_right()) ==
          "Move the left gripper to the right slightly");
    CHECK(render_command({Arm::Right, Verb::Move, Direction::Up, std::nullopt, std::nullopt}) ==
          "Move the right gripper upward");
    CHECK(render_command({Arm::Right, Verb::Rotate, std::nullopt,
                          symbols::RotationDir::CounterClockwise, std::nullopt}) ==
          "Rotate the right gripper counterclockwise");
    CHECK(render_command({Arm::Left, Verb::HoldStill, {}, {}, {}}) == "Hold the left arm still");
    CHECK(render_commands({{Arm::Left, Verb::OpenGripper, {}, {}, {}},
                           {Arm::Left, Verb::ResetToInitial, {}, {}, {}}}) ==
          "Open the left gripper; Move the left arm back to its initial pose");
  }

  TEST_CASE("invalid field combinations") {
    CHECK_THROWS_AS(check_command({Arm::None, Verb::HoldStill, {}, {}, {}}), InvalidArgument);
    CHECK_THROWS_AS(check_command({Arm::Left, Verb::Move, {}, {}, {}}), InvalidArgument);
    CHECK_THROWS_AS(check_command({Arm::Left, Verb::Rotate, Direction::Up, symbols::RotationDir::Clockwise, {}}),
                    InvalidArgument);
    CHECK_THROWS_AS(check_command({Arm::Left, Verb::OpenGripper, {}, {}, symbols::Magnitude::Slight}),
                    InvalidArgument);
  }

  TEST_CASE("vocabulary is closed and round-trips") {
    std::set<std::string> texts;
    for (Arm arm : {Arm::Left, Arm::Right}) {
      const auto vocab = command_vocabulary(arm);
      CHECK(vocab.size() == 24);
      for (const auto& c : vocab) {
        CHECK(c.arm == arm);
        const auto text = render_command(c);
        texts.insert(text);
        REQUIRE(parse_command(text) == c);
      }
    }
    CHECK(texts.size() == 48);
    CHECK(parse_command("  move the LEFT gripper to the right slightly. ") ==
          AnnotationFixture::move_right());
    CHECK_FALSE(parse_command("Move the left gripper sideways"));
  }

  TEST_CASE("parse_commands and find_commands") {
    const auto cmds = parse_commands("Move the left gripper to the right slightly; Close the left gripper.");
    REQUIRE(cmds.size() == 2);
    CHECK(cmds[1].verb == Verb::CloseGripper);
    CHECK_THROWS_AS(parse_commands("Close the left gripper; dance"), InvalidArgument);

    const auto found = find_commands(
        "Low-level guidance: First, move the right gripper forward significantly. "
        "Then close the right gripper.");
    REQUIRE(found.size() == 2);
    CHECK(found[0] == LowLevelCommand{Arm::Right, Verb::Move, Direction::Forward, std::nullopt,
                                      symbols::Magnitude::Significant});
    CHECK(found[1].verb == Verb::CloseGripper);
    CHECK(find_commands("The task is going fine.").empty());
  }
}

TEST_SUITE("stage 1") {
  TEST_CASE("success without failure fields") {
    AnnotationFixture f;
    const auto r = f.pipeline.record_stage1(std::nullopt, f.id, {true, {}, {}, {}}, "ann-1");
    CHECK(r.stage == Stage::Stage1Done);
    CHECK(r.diagnosis.success);
    CHECK(r.subtask_plan.subtasks.size() == 3);
    CHECK(consistency_problems(r).empty());
  }

  TEST_CASE("failure at t=4 s, subtask 1 of 3") {
    AnnotationFixture f;
    const auto r = f.failed_stage1();
    CHECK(r.stage == Stage::Stage1Done);
    REQUIRE(r.diagnosis.failure_keyframe);
    CHECK(r.diagnosis.failure_keyframe->frame_index == 8);
    CHECK(r.diagnosis.failure_keyframe->timestamp_s == 4.0);
    CHECK(r.diagnosis.failure_keyframe->origin == store::FrameOrigin::Keyframe);
    CHECK(r.diagnosis.failure_type == FailureType::Gripper6dPose);
    CHECK_FALSE(r.diagnosis.failure_reason);
    CHECK(r.created_at == "2026-09-21T14:13:20Z");
  }

  TEST_CASE("errors") {
    AnnotationFixture f;
    CHECK_THROWS_AS(f.pipeline.record_stage1(std::nullopt, f.id,
                                             {true, {}, {}, FailureType::GripperState}, "a"),
                    SuccessContradiction);
    CHECK_THROWS_AS(f.pipeline.record_stage1(std::nullopt, f.id,
                                             {false, 4.0, 3, FailureType::GripperState}, "a"),
                    SubtaskIndexOutOfRange);
    CHECK_THROWS_AS(f.pipeline.record_stage1(std::nullopt, f.id,
                                             {false, 4.5, 0, FailureType::GripperState}, "a"),
                    KeyframeNotInSampleList);
    CHECK_THROWS_AS(f.pipeline.record_stage1(std::nullopt, f.id,
                                             {false, 9.0, 0, FailureType::GripperState}, "a"),
                    KeyframeNotInSampleList);
    CHECK_THROWS_AS(f.pipeline.record_stage1(std::nullopt, "nope", {true, {}, {}, {}}, "a"),
                    NotFoundError);
    testing::ingest_simple(f.store, f.dir, testing::make_record("noplan", 2.0));
    CHECK_THROWS_AS(f.pipeline.record_stage1(std::nullopt, "noplan", {true, {}, {}, {}}, "a"),
                    MissingSubtaskPlan);
  }

  TEST_CASE("stage 1 cannot run on a later-stage record") {
    AnnotationFixture f;
    const auto r2 = f.failed_stage2();
    CHECK_THROWS_AS(f.pipeline.record_stage1(r2, f.id, {true, {}, {}, {}}, "a"), StageOrderError);
  }
}

TEST_SUITE("subtask decomposition") {
  TEST_CASE("model decomposition and manual edit") {
    endpoint::CallbackEndpoint mock([](const endpoint::ChatRequest& req) {
      CHECK(req.messages[0].text.find("Put the cube into the bowl") != std::string::npos);
      return std::string(R"(["Grasp the cube", "Place it into the bowl"])");
    });
    auto plan = decompose_task("t1", "Put the cube into the bowl", mock);
    CHECK(plan.subtasks == std::vector<std::string>{"Grasp the cube", "Place it into the bowl"});
    CHECK(plan.provenance == store::PlanProvenance::ModelDecomposed);
    plan = edit_subtask(plan, 1, "Drop the cube into the bowl");
    CHECK(plan.provenance == store::PlanProvenance::ManuallyEdited);
    CHECK(plan.subtasks[1] == "Drop the cube into the bowl");
    CHECK_THROWS_AS(edit_subtask(plan, 2, "x"), SubtaskIndexOutOfRange);
  }

  TEST_CASE("list formats") {
    CHECK(parse_subtask_list("1. Grasp the cube\n2) Lift it\n") ==
          std::vector<std::string>{"Grasp the cube", "Lift it"});
    CHECK(parse_subtask_list("- a\n* b") == std::vector<std::string>{"a", "b"});
    CHECK(parse_subtask_list("```json\n[\"a\", \"b\", \"c\"]\n```").size() == 3);
    CHECK_THROWS_AS(parse_subtask_list("I cannot help with that."), ResponseParseError);
  }

  TEST_CASE("endpoint failure leaves the stored plan untouched") {
    AnnotationFixture f;
    const auto before = f.store.subtask_plan(f.id);
    endpoint::CallbackEndpoint timeout([](const endpoint::ChatRequest&) -> std::string {
      throw EndpointError("timed out");
    });
    CHECK_THROWS_AS(decompose_task(f.id, "Put the cube into the bowl", timeout), EndpointError);
    CHECK(f.store.subtask_plan(f.id) == before);
  }
}

TEST_SUITE("stage 2") {
  TEST_CASE("avoidance set on the keyframe with a matching command") {
    AnnotationFixture f;
    const auto r = f.failed_stage2();
    CHECK(r.stage == Stage::Stage2Done);
    CHECK(r.guidance.avoidance_symbols->frame_index == 8);
    CHECK(consistency_problems(r).empty());
  }

  TEST_CASE("frame and arm cross-checks") {
    AnnotationFixture f;
    const auto r1 = f.failed_stage1();
    Stage2Input in;
    in.low_level_avoidance = {AnnotationFixture::move_right()};
    in.avoidance_symbols = AnnotationFixture::arrow_set(6, SetPurpose::Avoidance);
    CHECK_THROWS_AS(f.pipeline.record_stage2(r1, in, "a"), FrameMismatch);

    in.avoidance_symbols = AnnotationFixture::arrow_set(8, SetPurpose::Avoidance, Arm::Right);
    CHECK_THROWS_AS(f.pipeline.record_stage2(r1, in, "a"), ArmMismatch);

    Stage2Input corr;
    corr.correction_symbols = AnnotationFixture::arrow_set(7, SetPurpose::Correction);
    CHECK_THROWS_AS(f.pipeline.record_stage2(r1, corr, "a"), FrameMismatch);
    corr.correction_symbols = AnnotationFixture::arrow_set(11, SetPurpose::Correction);
    CHECK_THROWS_AS(f.pipeline.record_stage2(r1, corr, "a"), FrameMismatch);
    corr.correction_symbols = AnnotationFixture::arrow_set(10, SetPurpose::Correction);
    CHECK(f.pipeline.record_stage2(r1, corr, "a").stage == Stage::Stage2Done);
  }

  TEST_CASE("symbols outside the frame") {
    AnnotationFixture f;
    const auto r1 = f.failed_stage1();
    Stage2Input in;
    in.avoidance_symbols = AnnotationFixture::arrow_set(8, SetPurpose::Avoidance);
    in.avoidance_symbols->symbols[0].end = symbols::Point{64, 20};  // frame is 64 wide
    try {
      f.pipeline.record_stage2(r1, in, "a");
      FAIL("expected a validation error");
    } catch (const symbols::ValidationError& e) {
      REQUIRE(e.violations().size() == 1);
      CHECK(e.violations()[0].code == symbols::ViolationCode::CoordinateOutOfBounds);
    }
  }

  TEST_CASE("successful trajectories take no guidance") {
    AnnotationFixture f;
    const auto r1 = f.pipeline.record_stage1(std::nullopt, f.id, {true, {}, {}, {}}, "a");
    CHECK(f.pipeline.record_stage2(r1, {}, "a").stage == Stage::Stage2Done);
    Stage2Input in;
    in.low_level_avoidance = {AnnotationFixture::move_right()};
    CHECK_THROWS_AS(f.pipeline.record_stage2(r1, in, "a"), SuccessContradiction);
  }
}

TEST_SUITE("stage 3 and finalize") {
  TEST_CASE("drafts from the assist endpoint") {
    AnnotationFixture f;
    const auto r2 = f.failed_stage2();
    endpoint::CallbackEndpoint mock([](const endpoint::ChatRequest&) { return testing::stage3_reply(); });
    const auto r3 = f.pipeline.vlm_assist_stage3(r2, mock);
    CHECK(r3.stage == Stage::Stage3Draft);
    CHECK(r3.diagnosis.failure_reason == "The gripper is too far left of the cube.");
    CHECK(r3.guidance.high_level_avoidance == "Shift the gripper right before grasping.");
    CHECK(r3.guidance.high_level_correction == "Move the gripper right and retry the grasp.");
  }

  TEST_CASE("missing field leaves the record at stage 2") {
    AnnotationFixture f;
    const auto r2 = f.failed_stage2();
    endpoint::CallbackEndpoint mock([](const endpoint::ChatRequest&) { return testing::stage3_reply(false); });
    CHECK_THROWS_AS(f.pipeline.vlm_assist_stage3(r2, mock), ResponseParseError);
    CHECK(r2.stage == Stage::Stage2Done);
    CHECK_FALSE(r2.diagnosis.failure_reason);
  }

  TEST_CASE("overlay sent equals an independent render of the keyframe") {
    AnnotationFixture f;
    const auto r2 = f.failed_stage2();
    endpoint::ChatRequest captured;
    endpoint::CallbackEndpoint mock([&](const endpoint::ChatRequest& req) {
      captured = req;
      return testing::stage3_reply();
    });
    f.pipeline.vlm_assist_stage3(r2, mock);
    REQUIRE(captured.messages.size() == 1);
    REQUIRE(captured.messages[0].images.size() == 2);

    const auto key_path = f.dir / "store/trajectories/t1/media/head/frame_000008.png";
    const Image key = decode_image(read_file_bytes(key_path));
    const auto expected = encode_png(symbols::render_overlay(key, *r2.guidance.avoidance_symbols));
    CHECK(sha256_hex(captured.messages[0].images[0].bytes) == sha256_hex(expected));

    const auto text = captured.messages[0].text;
    CHECK(text.find("Lift the cube") != std::string::npos);
    CHECK(text.find("Gripper 6D pose") != std::string::npos);
    CHECK(text.find("Move the left gripper to the right slightly") != std::string::npos);
    CHECK(text.find(symbols::emit_symbol_code(*r2.guidance.avoidance_symbols)) != std::string::npos);
  }

  TEST_CASE("finalize accepts unedited drafts and then freezes the record") {
    AnnotationFixture f;
    endpoint::CallbackEndpoint mock([](const endpoint::ChatRequest&) { return testing::stage3_reply(); });
    const auto r3 = f.pipeline.vlm_assist_stage3(f.failed_stage2(), mock);
    const auto fin = f.pipeline.finalize(r3, {}, "ann-2");
    CHECK(fin.stage == Stage::Finalized);
    CHECK(fin.annotator_id == "ann-2");
    CHECK(f.pipeline.problems(fin).empty());

    CHECK_THROWS_AS(f.pipeline.finalize(fin, {}, "a"), ImmutableError);
    CHECK_THROWS_AS(f.pipeline.vlm_assist_stage3(fin, mock), ImmutableError);
    CHECK_THROWS_AS(f.pipeline.record_stage2(fin, {}, "a"), ImmutableError);
    CHECK_THROWS_AS(f.pipeline.record_stage1(fin, f.id, {true, {}, {}, {}}, "a"), ImmutableError);

    AnnotationRepository repo(f.dir / "annotations");
    repo.save(fin);
    repo.save(fin);
    auto changed = fin;
    changed.diagnosis.failure_reason = "different";
    CHECK_THROWS_AS(repo.save(changed), ImmutableError);
    CHECK(repo.load(f.id) == fin);
  }

  TEST_CASE("empty failure reason is incomplete") {
    AnnotationFixture f;
    endpoint::CallbackEndpoint mock([](const endpoint::ChatRequest&) { return testing::stage3_reply(); });
    const auto r3 = f.pipeline.vlm_assist_stage3(f.failed_stage2(), mock);
    EditedTexts edits;
    edits.failure_reason = "  ";
    CHECK_THROWS_AS(f.pipeline.finalize(r3, edits, "a"), IncompleteAnnotation);
    edits.failure_reason = "Edited reason";
    CHECK(f.pipeline.finalize(r3, edits, "a").diagnosis.failure_reason == "Edited reason");
  }

  TEST_CASE("finalize requires a stage-3 draft") {
    AnnotationFixture f;
    CHECK_THROWS_AS(f.pipeline.finalize(f.failed_stage2(), {}, "a"), StageOrderError);
  }

  TEST_CASE("successful trajectory goes through without the endpoint") {
    AnnotationFixture f;
    endpoint::CallbackEndpoint never([](const endpoint::ChatRequest&) -> std::string {
      FAIL("endpoint called");
      return {};
    });
    auto r = f.pipeline.record_stage1(std::nullopt, f.id, {true, {}, {}, {}}, "a");
    r = f.pipeline.record_stage2(r, {}, "a");
    r = f.pipeline.vlm_assist_stage3(r, never);
    r = f.pipeline.finalize(r, {}, "a");
    CHECK(r.stage == Stage::Finalized);
    CHECK(f.pipeline.problems(r).empty());
    CHECK_FALSE(r.diagnosis.failure_reason);
    CHECK(r.guidance.empty());
  }
}

TEST_SUITE("annotation records") {
  TEST_CASE("json round trip") {
    AnnotationFixture f;
    endpoint::CallbackEndpoint mock([](const endpoint::ChatRequest&) { return testing::stage3_reply(); });
    const auto fin = f.pipeline.finalize(f.pipeline.vlm_assist_stage3(f.failed_stage2(), mock), {}, "a");
    const auto j = to_json(fin);
    CHECK(j["schema_version"] == kAnnotationSchemaVersion);
    CHECK(j["guidance"]["low_level_avoidance"][0] == "Move the left gripper to the right slightly");
    CHECK(annotation_from_json(j) == fin);
    CHECK(annotation_from_json(nlohmann::json::parse(j.dump())) == fin);
    auto bad = j;
    bad["schema_version"] = 99;
    CHECK_THROWS_AS(annotation_from_json(bad), InvalidArgument);
  }

  TEST_CASE("replaying the same operations yields the same record") {
    auto run = [] {
      AnnotationFixture f;
      endpoint::CallbackEndpoint mock([](const endpoint::ChatRequest&) { return testing::stage3_reply(); });
      return f.pipeline.finalize(f.pipeline.vlm_assist_stage3(f.failed_stage2(), mock), {}, "a");
    };
    CHECK(run() == run());
  }

  TEST_CASE("consistency problems are reported") {
    AnnotationRecord r;
    r.trajectory_id = "x";
    r.subtask_plan.subtasks = {"a"};
    r.diagnosis.success = true;
    r.diagnosis.failure_type = FailureType::TaskPlanning;
    CHECK_FALSE(consistency_problems(r).empty());
    r.diagnosis.failure_type.reset();
    r.guidance.high_level_avoidance = "x";
    CHECK_FALSE(consistency_problems(r).empty());
    r.guidance = {};
    CHECK(consistency_problems(r).empty());
  }
}

TEST_SUITE("leases") {
  TEST_CASE("one holder, renewable, expiring") {
    auto now = std::make_shared<TimePoint>(std::chrono::seconds(1000));
    LeaseManager leases([now] { return *now; });
    const auto l = leases.acquire("t", "alice");
    CHECK(l.expires_at == *now + std::chrono::minutes(10));
    CHECK_THROWS_AS(leases.acquire("t", "bob"), LeaseConflict);
    CHECK_THROWS_AS(leases.require("t", "bob"), LeaseConflict);
    CHECK_NOTHROW(leases.require("t", "alice"));
    *now += std::chrono::minutes(9);
    leases.acquire("t", "alice");
    *now += std::chrono::minutes(9);
    CHECK_NOTHROW(leases.require("t", "alice"));
    *now += std::chrono::minutes(2);
    CHECK_THROWS_AS(leases.require("t", "alice"), LeaseConflict);
    CHECK(leases.acquire("t", "bob").annotator_id == "bob");
    CHECK_THROWS_AS(leases.release("t", "alice"), LeaseConflict);
    leases.release("t", "bob");
    CHECK_FALSE(leases.holder("t"));
  }
}
