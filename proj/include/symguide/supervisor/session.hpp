#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "json.hpp"
#include "symguide/common/clock.hpp"
#include "symguide/endpoint/chat.hpp"
#include "symguide/supervisor/correction.hpp"
#include "symguide/supervisor/types.hpp"

namespace symguide::supervisor {

enum class SessionState { Monitoring, Diagnosing, Correcting };
std::string_view to_token(SessionState state);  // "monitoring" / ...

struct Observation {
  ObservationFrames frames;
  double timestamp_s = 0;  // stream time
};

// Integration point for a robot or simulator. Implementations must not block
// the policy: next_observation returns the latest frames, deliver only
// enqueues. Any exception aborts the session.
class EnvironmentAdapter {
 public:
  virtual ~EnvironmentAdapter() = default;
  virtual Observation next_observation() = 0;
  virtual std::int64_t chunk_counter() = 0;
  virtual void deliver(const CorrectionCommand& command) = 0;
  virtual bool task_done() = 0;
};

// One line of the session log. `events` holds what happened during the step
// in order: {"type": "transition"|"request"|"response"|"error"|"command"|"grasp", ...}.
struct StepRecord {
  std::int64_t step = 0;
  std::string at;  // wall clock, UTC
  double observation_timestamp_s = 0;
  std::int64_t chunk_counter = 0;
  SessionState state_after = SessionState::Monitoring;
  std::vector<nlohmann::json> events;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct SessionSummary {
  std::string status;  // "task_done", "max_steps", "stopped", "aborted"
  std::string error;   // adapter failure message when aborted
  std::int64_t steps = 0;
  int diagnosis_requests = 0;
  int endpoint_errors = 0;
  int parse_errors = 0;
  int corrections = 0;
  int correcting_entered = 0;

  friend bool operator==(const SessionSummary&, const SessionSummary&) = default;
};

struct SessionLog {
  std::vector<StepRecord> steps;
  SessionSummary summary;

  std::size_t size() const { return steps.size(); }
  bool aborted() const { return summary.status == "aborted"; }
  friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

struct SessionOptions {
  std::int64_t max_steps = 1000;
  Clock clock = system_clock();
  GraspEstimator* grasp_estimator = nullptr;  // consulted for PMC grasps
  std::stop_token stop;                       // checked between steps
};

// Drives the adapter step by step. A diagnosis is requested when the chunk
// counter has advanced by at least query_interval_chunks since the previous
// request (the first step always qualifies), with the head frames chosen by
// select_history. States: MONITORING -> DIAGNOSING -> CORRECTING on a failure
// (the command is delivered), back to MONITORING once a later scheduled
// diagnosis reports no failure. Endpoint and parse errors are logged and the
// previous state is kept. The call blocks only its own thread; run it beside
// the policy loop.
SessionLog run_session(const SupervisorConfig& config, EnvironmentAdapter& adapter,
                       endpoint::ChatEndpoint& vlm, const SessionOptions& options = {});

// JSON lines: one per step, then {"summary": {...}}.
void write_session_log(const std::filesystem::path& path, const SessionLog& log);
SessionLog read_session_log(const std::filesystem::path& path);
nlohmann::json to_json(const StepRecord& step);
nlohmann::json to_json(const SessionSummary& summary);

// Every state transition in order as "from->to".
std::vector<std::string> transitions(const SessionLog& log);

// Answers diagnosis requests with the responses recorded in a log, in order;
// recorded endpoint errors are re-thrown as EndpointError.
class ReplayEndpoint : public endpoint::ChatEndpoint {
 public:
  explicit ReplayEndpoint(const SessionLog& log);
  endpoint::ChatResponse complete(const endpoint::ChatRequest& request) override;
  std::size_t remaining() const { return replies_.size() - next_; }

 private:
  struct Reply {
    std::optional<std::string> text;
    std::string error;
  };
  std::vector<Reply> replies_;
  std::size_t next_ = 0;
};

// Deterministic stand-in robot. Each observation is one action chunk; the
// head view is plain green while the task is going well and red while the
// scripted failure is active. The failure starts at `fail_at_chunk` and
// clears after `clear_after_corrections` delivered commands.
struct Scenario {
  std::string name = "nominal";
  std::int64_t total_chunks = 60;
  double chunk_duration_s = 0.5;
  std::optional<std::int64_t> fail_at_chunk;
  int clear_after_corrections = 1;
  std::optional<std::int64_t> raise_at_step;  // next_observation throws here
  int frame_width = 160;
  int frame_height = 120;
  bool wrist_views = true;
};

// "nominal", "fail_then_recover", "adapter_fault". Throws InvalidArgument.
Scenario named_scenario(std::string_view name);

class ScriptedAdapter : public EnvironmentAdapter {
 public:
  explicit ScriptedAdapter(Scenario scenario);
  Observation next_observation() override;
  std::int64_t chunk_counter() override { return chunk_ - 1; }
  void deliver(const CorrectionCommand& command) override;
  bool task_done() override { return chunk_ >= scenario_.total_chunks; }

  bool failing() const;
  const std::vector<CorrectionCommand>& delivered() const { return delivered_; }

 private:
  Scenario scenario_;
  std::int64_t chunk_ = 0;  // observations handed out so far
  std::int64_t step_ = 0;
  std::vector<CorrectionCommand> delivered_;
};

// Mock diagnosis model for scripted scenarios: reports a failure with a
// crosshair and a corrective command when the newest attached head frame is
// red, and "The task is proceeding correctly." otherwise.
std::string scripted_vlm_reply(const endpoint::ChatRequest& request);

}  // namespace symguide::supervisor
