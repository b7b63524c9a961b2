#include "symguide/supervisor/session.hpp"

#include <fstream>

#include "symguide/common/errors.hpp"
#include "symguide/supervisor/diagnosis.hpp"

namespace symguide::supervisor {

using nlohmann::json;

std::string_view to_token(SessionState s) {
  switch (s) {
    case SessionState::Monitoring: return "monitoring";
    case SessionState::Diagnosing: return "diagnosing";
    case SessionState::Correcting: return "correcting";
  }
  return "monitoring";
}

namespace {

std::optional<SessionState> state_from_token(std::string_view t) {
  if (t == "monitoring") return SessionState::Monitoring;
  if (t == "diagnosing") return SessionState::Diagnosing;
  if (t == "correcting") return SessionState::Correcting;
  return std::nullopt;
}

class Session {
 public:
  Session(const SupervisorConfig& config, EnvironmentAdapter& adapter, endpoint::ChatEndpoint& vlm,
          const SessionOptions& options)
      : config_(config), adapter_(adapter), vlm_(vlm), options_(options) {}

  SessionLog run() {
    check_config(config_);
    for (std::int64_t step = 0;; ++step) {
      if (options_.stop.stop_requested()) return finish("stopped");
      if (step >= options_.max_steps) return finish("max_steps");
      Observation obs;
      std::int64_t counter = 0;
      try {
        if (adapter_.task_done()) return finish("task_done");
        obs = adapter_.next_observation();
        counter = adapter_.chunk_counter();
      } catch (const std::exception& e) {
        return abort(e.what());
      }
      StepRecord rec;
      rec.step = step;
      rec.at = now();
      rec.observation_timestamp_s = obs.timestamp_s;
      rec.chunk_counter = counter;
      remember(obs);
      bool deliver_failed = false;
      std::string deliver_error;
      if (!last_poll_ || counter - *last_poll_ >= config_.query_interval_chunks) {
        last_poll_ = counter;
        diagnose(rec, obs, deliver_failed, deliver_error);
      }
      rec.state_after = state_;
      log_.steps.push_back(std::move(rec));
      ++log_.summary.steps;
      if (deliver_failed) return abort(deliver_error);
    }
  }

 private:
  std::string now() const { return format_utc(options_.clock()); }

  json event(const char* type) const { return json{{"type", type}, {"at", now()}}; }

  void transition(StepRecord& rec, SessionState to) {
    auto e = event("transition");
    e["from"] = to_token(state_);
    e["to"] = to_token(to);
    rec.events.push_back(std::move(e));
    if (to == SessionState::Correcting) ++log_.summary.correcting_entered;
    state_ = to;
  }

  void remember(const Observation& obs) {
    history_.emplace_back(obs.timestamp_s, obs.frames.head);
    const double keep_after = obs.timestamp_s - config_.history_window_s - 1.0;
    while (!history_.empty() && history_.front().first < keep_after) history_.pop_front();
  }

  void fail(StepRecord& rec, SessionState resume, const char* kind, const std::string& message) {
    auto e = event("error");
    e["kind"] = kind;
    e["message"] = message;
    rec.events.push_back(std::move(e));
    transition(rec, resume);
  }

  void diagnose(StepRecord& rec, const Observation& obs, bool& deliver_failed, std::string& deliver_error) {
    const SessionState resume = state_;
    transition(rec, SessionState::Diagnosing);

    std::vector<double> times;
    for (const auto& h : history_) times.push_back(h.first);
    const auto chosen = select_history(times, obs.timestamp_s, config_.history_window_s, config_.history_fps);
    std::vector<Image> frames;
    for (const auto& h : history_) {
      if (std::find(chosen.begin(), chosen.end(), h.first) != chosen.end()) frames.push_back(h.second);
    }
    auto req = event("request");
    req["frame_timestamps_s"] = chosen;
    rec.events.push_back(std::move(req));
    ++log_.summary.diagnosis_requests;

    std::string reply;
    try {
      reply = vlm_.complete(diagnosis_request(config_, frames)).text;
    } catch (const EndpointError& e) {
      ++log_.summary.endpoint_errors;
      return fail(rec, resume, "EndpointError", e.what());
    }
    auto res = event("response");
    res["text"] = reply;
    rec.events.push_back(std::move(res));

    DiagnosisResponse d;
    CorrectionCommand cmd;
    try {
      d = parse_cot_response(reply);
      if (!d.failed) return transition(rec, SessionState::Monitoring);
      cmd = make_correction(d, obs.frames.head, config_.mode);
      check_command(cmd);
    } catch (const Error& e) {
      ++log_.summary.parse_errors;
      return fail(rec, resume, "ResponseParseError", e.what());
    }
    if (cmd.pmc_target && cmd.pmc_target->grasp_requested && options_.grasp_estimator) {
      auto g = event("grasp");
      if (const auto pose = options_.grasp_estimator->estimate(obs.frames.head, cmd.pmc_target->point)) {
        g["pose"] = {{"point", {pose->point.x, pose->point.y}}, {"yaw_rad", pose->yaw_rad}, {"width_m", pose->width_m}};
      } else {
        g["pose"] = nullptr;
      }
      rec.events.push_back(std::move(g));
    }
    auto c = event("command");
    c["command"] = to_json(cmd);
    c["diagnosis"] = to_json(d);
    rec.events.push_back(std::move(c));
    try {
      adapter_.deliver(cmd);
    } catch (const std::exception& e) {
      deliver_failed = true;
      deliver_error = e.what();
      return;
    }
    ++log_.summary.corrections;
    transition(rec, SessionState::Correcting);
  }

  SessionLog finish(const char* status) {
    log_.summary.status = status;
    return std::move(log_);
  }

  SessionLog abort(const std::string& message) {
    log_.summary.error = message;
    return finish("aborted");
  }

  const SupervisorConfig& config_;
  EnvironmentAdapter& adapter_;
  endpoint::ChatEndpoint& vlm_;
  const SessionOptions& options_;
  SessionLog log_;
  SessionState state_ = SessionState::Monitoring;
  std::optional<std::int64_t> last_poll_;
  std::deque<std::pair<double, Image>> history_;
};

}  // namespace

SessionLog run_session(const SupervisorConfig& config, EnvironmentAdapter& adapter, endpoint::ChatEndpoint& vlm,
                       const SessionOptions& options) {
  return Session(config, adapter, vlm, options).run();
}

json to_json(const StepRecord& s) {
  return json{{"step", s.step},
              {"at", s.at},
              {"observation_timestamp_s", s.observation_timestamp_s},
              {"chunk_counter", s.chunk_counter},
              {"state_after", to_token(s.state_after)},
              {"events", s.events}};
}

json to_json(const SessionSummary& s) {
  return json{{"status", s.status},
              {"error", s.error},
              {"steps", s.steps},
              {"diagnosis_requests", s.diagnosis_requests},
              {"endpoint_errors", s.endpoint_errors},
              {"parse_errors", s.parse_errors},
              {"corrections", s.corrections},
              {"correcting_entered", s.correcting_entered}};
}

void write_session_log(const std::filesystem::path& path, const SessionLog& log) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& s : log.steps) out << to_json(s).dump() << '\n';
  out << json{{"summary", to_json(log.summary)}}.dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

SessionLog read_session_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  SessionLog log;
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = json::parse(line);
      if (j.contains("summary")) {
        const auto& s = j["summary"];
        auto& m = log.summary;
        m.status = s.at("status").get<std::string>();
        m.error = s.at("error").get<std::string>();
        m.steps = s.at("steps").get<std::int64_t>();
        m.diagnosis_requests = s.at("diagnosis_requests").get<int>();
        m.endpoint_errors = s.at("endpoint_errors").get<int>();
        m.parse_errors = s.at("parse_errors").get<int>();
        m.corrections = s.at("corrections").get<int>();
        m.correcting_entered = s.at("correcting_entered").get<int>();
        continue;
      }
      StepRecord r;
      r.step = j.at("step").get<std::int64_t>();
      r.at = j.at("at").get<std::string>();
      r.observation_timestamp_s = j.at("observation_timestamp_s").get<double>();
      r.chunk_counter = j.at("chunk_counter").get<std::int64_t>();
      const auto st = state_from_token(j.at("state_after").get<std::string>());
      if (!st) throw InvalidArgument("unknown state in " + path.string());
      r.state_after = *st;
      for (const auto& e : j.at("events")) r.events.push_back(e);
      log.steps.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  return log;
}

std::vector<std::string> transitions(const SessionLog& log) {
  std::vector<std::string> out;
  for (const auto& s : log.steps) {
    for (const auto& e : s.events) {
      if (e.at("type") == "transition") {
        out.push_back(e.at("from").get<std::string>() + "->" + e.at("to").get<std::string>());
      }
    }
  }
  return out;
}

ReplayEndpoint::ReplayEndpoint(const SessionLog& log) {
  for (const auto& s : log.steps) {
    for (const auto& e : s.events) {
      const auto type = e.at("type").get<std::string>();
      if (type == "request") {
        replies_.push_back({});
      } else if (type == "response" && !replies_.empty()) {
        replies_.back().text = e.at("text").get<std::string>();
      } else if (type == "error" && !replies_.empty() && e.at("kind") == "EndpointError") {
        replies_.back().error = e.at("message").get<std::string>();
      }
    }
  }
}

endpoint::ChatResponse ReplayEndpoint::complete(const endpoint::ChatRequest&) {
  if (next_ >= replies_.size()) throw EndpointError("replay: no recorded response left");
  const auto& r = replies_[next_++];
  if (!r.text) throw EndpointError(r.error.empty() ? "replay: recorded request had no response" : r.error);
  return {*r.text, *r.text};
}

Scenario named_scenario(std::string_view name) {
  Scenario s;
  s.name = std::string(name);
  if (name == "nominal") return s;
  if (name == "fail_then_recover") {
    s.fail_at_chunk = 20;
    return s;
  }
  if (name == "adapter_fault") {
    s.raise_at_step = 3;
    return s;
  }
  throw InvalidArgument("unknown scenario \"" + std::string(name) +
                        "\" (nominal, fail_then_recover, adapter_fault)");
}

ScriptedAdapter::ScriptedAdapter(Scenario scenario) : scenario_(std::move(scenario)) {}

bool ScriptedAdapter::failing() const {
  const std::int64_t current = chunk_ - 1;
  return scenario_.fail_at_chunk && current >= *scenario_.fail_at_chunk &&
         static_cast<int>(delivered_.size()) < scenario_.clear_after_corrections;
}

Observation ScriptedAdapter::next_observation() {
  if (scenario_.raise_at_step && step_ == *scenario_.raise_at_step) {
    throw AdapterError("scripted adapter fault at step " + std::to_string(step_));
  }
  ++step_;
  Observation obs;
  obs.timestamp_s = static_cast<double>(chunk_) * scenario_.chunk_duration_s;
  ++chunk_;
  const Rgb color = failing() ? Rgb{200, 40, 40} : Rgb{40, 160, 40};
  obs.frames.head = Image(scenario_.frame_width, scenario_.frame_height, color);
  if (scenario_.wrist_views) {
    obs.frames.left_wrist = Image(scenario_.frame_width / 2, scenario_.frame_height / 2, {90, 90, 90});
    obs.frames.right_wrist = Image(scenario_.frame_width / 2, scenario_.frame_height / 2, {120, 120, 120});
  }
  return obs;
}

void ScriptedAdapter::deliver(const CorrectionCommand& command) { delivered_.push_back(command); }

std::string scripted_vlm_reply(const endpoint::ChatRequest& request) {
  const auto& images = request.messages.at(0).images;
  if (images.empty()) return "The task is proceeding correctly.";
  const Image last = decode_image(images.back().bytes);
  const int cx = last.width / 2, cy = last.height / 2;
  const Rgb c = last.at(cx, cy);
  if (!(c.r > 150 && c.g < 100)) return "The task is proceeding correctly.";
  const int dx = std::max(10, last.width / 8);
  return "Failure detection: The robot fails the task.\n"
         "Failure localization: The gripper is misaligned with the object.\n"
         "Low-level guidance: Move the left gripper to the right slightly.\n"
         "```symbols\nframe=0 purpose=correction\n"
         "straight_arrow(arm=left, color=green, start=(" + std::to_string(cx - dx) + "," + std::to_string(cy) +
         "), end=(" + std::to_string(cx + dx) + "," + std::to_string(cy) + "), mag=slight)\n"
         "crosshair(arm=left, start=(" + std::to_string(cx + dx) + "," + std::to_string(cy) + "))\n```";
}

}  // namespace symguide::supervisor
