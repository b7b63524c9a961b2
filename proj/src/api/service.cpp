#include "symguide/api/service.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "symguide/annotation/pipeline.hpp"
#include "symguide/annotation/repository.hpp"
#include "symguide/common/errors.hpp"
#include "symguide/common/hashing.hpp"
#include "symguide/endpoint/http_client.hpp"
#include "symguide/eval/run.hpp"
#include "symguide/store/store.hpp"
#include "symguide/symbols/codec.hpp"
#include "symguide/symbols/geometry.hpp"
#include "symguide/symbols/render.hpp"
#include "symguide/vqa/split.hpp"

namespace symguide::api {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Malformed request: missing field, wrong type, bad JSON.
SYMGUIDE_DEFINE_ERROR(BadRequest, "BadRequest");
SYMGUIDE_DEFINE_ERROR(Unavailable, "Unavailable");

void send_json(httplib::Response& res, int status, json body) {
  body["schema_version"] = kApiSchemaVersion;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json violation_json(const symbols::Violation& v) {
  json j{{"code", symbols::to_token(v.code)},
         {"severity", v.severity == symbols::Severity::Error ? "error" : "warning"},
         {"message", v.message}};
  j["symbol_index"] = v.symbol_index ? json(*v.symbol_index) : json(nullptr);
  return j;
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& message,
                json violations = json::array()) {
  if (violations.empty() && status == 422) {
    violations.push_back({{"code", kind}, {"severity", "error"}, {"message", message}, {"symbol_index", nullptr}});
  }
  send_json(res, status, {{"error", {{"kind", kind}, {"message", message}}}, {"violations", violations}});
}

int status_for(std::string_view kind) {
  if (kind == "NotFoundError") return 404;
  if (kind == "LeaseConflict" || kind == "ImmutableError") return 409;
  if (kind == "BadRequest") return 400;
  if (kind == "EndpointError" || kind == "ResponseParseError") return 502;
  if (kind == "Unavailable") return 503;
  if (kind == "IoError" || kind == "MediaDecodeError" || kind == "ImageFormatError") return 500;
  return 422;
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw BadRequest("request body must be a JSON object");
  return j;
}

std::string annotator_of(const httplib::Request& req, const json& body) {
  std::string id = req.get_header_value("X-Annotator-Id");
  if (id.empty() && body.contains("annotator_id") && body["annotator_id"].is_string()) {
    id = body["annotator_id"].get<std::string>();
  }
  if (id.empty()) throw BadRequest("annotator id required (X-Annotator-Id header or annotator_id field)");
  return id;
}

template <class T>
std::optional<T> optional_field(const json& body, const char* key) {
  if (!body.contains(key) || body[key].is_null()) return std::nullopt;
  try {
    return body[key].get<T>();
  } catch (const json::exception&) {
    throw BadRequest(std::string("field ") + key + " has the wrong type");
  }
}

std::vector<annotation::LowLevelCommand> commands_field(const json& body, const char* key) {
  std::vector<annotation::LowLevelCommand> out;
  if (!body.contains(key) || body[key].is_null()) return out;
  if (!body[key].is_array()) throw BadRequest(std::string("field ") + key + " must be an array of strings");
  for (const auto& item : body[key]) {
    if (!item.is_string()) throw BadRequest(std::string("field ") + key + " must be an array of strings");
    const auto c = annotation::parse_command(item.get<std::string>());
    if (!c) throw InvalidArgument("\"" + item.get<std::string>() + "\" is not a known low-level command");
    out.push_back(*c);
  }
  return out;
}

json rgb(Rgb c) { return json::array({c.r, c.g, c.b}); }

json style_document() {
  const symbols::RenderStyle style;
  using M = symbols::GlyphMetrics;
  json axis = json::object();
  json semantics = json::object();
  for (auto c : {symbols::AxisColor::Red, symbols::AxisColor::Green, symbols::AxisColor::Blue}) {
    axis[std::string(symbols::to_token(c))] = rgb(style.axis_rgb(c));
    const auto a = symbols::axis_of(c);
    semantics[std::string(symbols::to_token(c))] = a == symbols::MotionAxis::ForwardBackward ? "forward_backward"
                                                   : a == symbols::MotionAxis::LeftRight      ? "left_right"
                                                                                              : "up_down";
  }
  json kinds = json::array();
  for (auto k : symbols::kAllKinds) kinds.push_back(symbols::to_token(k));
  return json{{"kinds", kinds},
              {"glyph_radius", symbols::kGlyphRadius},
              {"arrowhead_length", symbols::kArrowheadLength},
              {"line_width", style.line_width},
              {"dash_on", style.dash_on},
              {"dash_off", style.dash_off},
              {"metrics",
               {{"crosshair_ring", M::crosshair_ring},
                {"crosshair_arm", M::crosshair_arm},
                {"rotation_radius", M::rotation_radius},
                {"rotation_head", M::rotation_head},
                {"badge_half_width", M::badge_half_width},
                {"badge_half_height", M::badge_half_height},
                {"prohibition_radius", M::prohibition_radius},
                {"rewind_half", M::rewind_half}}},
              {"colors",
               {{"axis", axis},
                {"crosshair", rgb(style.crosshair)},
                {"rotation", rgb(style.rotation)},
                {"badge_on", rgb(style.badge_on)},
                {"badge_off", rgb(style.badge_off)},
                {"badge_text", rgb(style.badge_text)},
                {"prohibition", rgb(style.prohibition)},
                {"rewind", rgb(style.rewind)}}},
              {"axis_semantics", semantics}};
}

std::string content_type_for(const fs::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".ppm") return "image/x-portable-pixmap";
  return "application/octet-stream";
}

}  // namespace

struct ApiService::Impl {
  explicit Impl(ApiConfig c)
      : config(std::move(c)),
        store(config.store_root),
        repo(config.annotations_dir),
        leases(config.clock, config.lease_duration),
        pipeline(store, config.clock) {
    if (config.assist) {
      assist = config.assist;
    } else if (config.assist_endpoint) {
      assist = std::make_shared<endpoint::HttpChatClient>(*config.assist_endpoint);
    }
    routes();
  }

  ~Impl() {
    stop();
    wait_for_runs();
  }

  ApiConfig config;
  store::TrajectoryStore store;
  annotation::AnnotationRepository repo;
  annotation::LeaseManager leases;
  annotation::AnnotationPipeline pipeline;
  std::shared_ptr<endpoint::ChatEndpoint> assist;
  httplib::Server server;
  std::thread serve_thread;
  std::mutex write_mutex;  // serializes read-modify-write of records

  struct RunState {
    std::string status;  // running, done, failed
    std::string error;
  };
  std::mutex runs_mutex;
  std::map<std::string, RunState> runs;
  std::vector<std::thread> run_threads;
  std::atomic<int> run_counter{0};

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  Handler guarded(Handler fn) {
    return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const symbols::ValidationError& e) {
        json v = json::array();
        for (const auto& x : e.violations()) v.push_back(violation_json(x));
        send_error(res, 422, e.kind(), e.what(), v);
      } catch (const SyntaxError& e) {
        send_error(res, 422, e.kind(), e.what(),
                   json::array({{{"code", "SyntaxError"}, {"severity", "error"}, {"message", e.what()},
                                 {"symbol_index", nullptr}, {"line", e.line()}}}));
      } catch (const Error& e) {
        send_error(res, status_for(e.kind()), e.kind(), e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, "BadRequest", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "InternalError", e.what());
      }
    };
  }

  void require_trajectory(const std::string& id) const {
    if (!store.contains(id)) throw NotFoundError("unknown trajectory " + id);
  }

  annotation::AnnotationRecord require_record(const std::string& id) const {
    auto r = repo.load(id);
    if (!r) throw NotFoundError(id + " has no annotation yet");
    return *r;
  }

  json trajectory_summary(const store::TrajectoryRecord& t) const {
    json j = t;
    const auto r = repo.load(t.id);
    j["stage"] = r ? json(annotation::to_token(r->stage)) : json(nullptr);
    return j;
  }

  json lease_json(const std::string& id) const {
    const auto l = leases.holder(id);
    if (!l) return nullptr;
    return json{{"annotator_id", l->annotator_id}, {"expires_at", format_utc(l->expires_at)}};
  }

  // Lease check plus serialized update of one record.
  template <class Fn>
  void mutate(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
    const auto id = req.path_params.at("id");
    const auto body = parse_body(req);
    const auto who = annotator_of(req, body);
    require_trajectory(id);
    std::lock_guard lock(write_mutex);
    leases.acquire(id, who);
    json out = fn(id, body, who);
    send_json(res, 200, std::move(out));
  }

  void routes() {
    server.Get("/api/health", guarded([](const httplib::Request&, httplib::Response& res) {
                 send_json(res, 200, {{"status", "ok"}});
               }));

    server.Get("/api/style", guarded([](const httplib::Request&, httplib::Response& res) {
                 send_json(res, 200, style_document());
               }));

    server.Get("/api/trajectories", guarded([this](const httplib::Request&, httplib::Response& res) {
                 json list = json::array();
                 for (const auto& t : store.list()) list.push_back(trajectory_summary(t));
                 send_json(res, 200, {{"trajectories", list}});
               }));

    server.Get("/api/trajectories/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto id = req.path_params.at("id");
                 const auto t = store.get(id);
                 json samples = json::array();
                 for (const auto& f : store.sample_frames(id)) samples.push_back(f);
                 json out = trajectory_summary(t);
                 out["samples"] = samples;
                 out["frame_count"] = store.frame_count(id);
                 const auto plan = store.subtask_plan(id);
                 out["subtask_plan"] = plan ? json(*plan) : json(nullptr);
                 const auto r = repo.load(id);
                 out["annotation"] = r ? annotation::to_json(*r) : json(nullptr);
                 out["lease"] = lease_json(id);
                 send_json(res, 200, {{"trajectory", out}});
               }));

    server.Get("/api/trajectories/:id/frames/:index",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto id = req.path_params.at("id");
                 require_trajectory(id);
                 int index = 0;
                 try {
                   std::size_t used = 0;
                   index = std::stoi(req.path_params.at("index"), &used);
                   if (used != req.path_params.at("index").size()) throw std::invalid_argument("trailing");
                 } catch (const std::exception&) {
                   throw BadRequest("frame index must be an integer");
                 }
                 auto view = store::View::Head;
                 const auto v = req.get_param_value("view");
                 if (v == "wrist0") {
                   view = store::View::Wrist0;
                 } else if (v == "wrist1") {
                   view = store::View::Wrist1;
                 } else if (!v.empty() && v != "head") {
                   throw BadRequest("view must be head, wrist0 or wrist1");
                 }
                 if (index < 0 || static_cast<std::size_t>(index) >= store.frame_count(id, view)) {
                   throw NotFoundError("frame " + std::to_string(index) + " does not exist");
                 }
                 const auto bytes = store.frame_bytes(id, index, view);
                 res.status = 200;
                 res.set_content(std::string(bytes.begin(), bytes.end()),
                                 content_type_for(store.frame_path(id, index, view)));
               }));

    server.Get("/api/trajectories/:id/annotation",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto id = req.path_params.at("id");
                 require_trajectory(id);
                 const auto r = require_record(id);
                 send_json(res, 200, {{"annotation", annotation::to_json(r)}, {"problems", pipeline.problems(r)}});
               }));

    server.Post("/api/trajectories/:id/lease", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto id = req.path_params.at("id");
                  const auto who = annotator_of(req, parse_body(req));
                  require_trajectory(id);
                  leases.acquire(id, who);
                  send_json(res, 200, {{"lease", lease_json(id)}});
                }));

    server.Delete("/api/trajectories/:id/lease",
                  guarded([this](const httplib::Request& req, httplib::Response& res) {
                    const auto id = req.path_params.at("id");
                    const auto who = annotator_of(req, parse_body(req));
                    require_trajectory(id);
                    leases.release(id, who);
                    send_json(res, 200, {{"lease", nullptr}});
                  }));

    server.Put("/api/trajectories/:id/subtasks", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 mutate(req, res, [this](const std::string& id, const json& body, const std::string&) {
                   const auto list = optional_field<std::vector<std::string>>(body, "subtasks");
                   if (!list || list->empty()) throw BadRequest("subtasks must be a non-empty array of strings");
                   if (const auto r = repo.load(id)) {
                     if (r->stage != annotation::Stage::Stage1Done) {
                       throw StageOrderError("the subtask plan is fixed once stage 2 is recorded");
                     }
                     const auto idx = r->diagnosis.failure_subtask_index;
                     if (idx && static_cast<std::size_t>(*idx) >= list->size()) {
                       throw SubtaskIndexOutOfRange("stage 1 points at subtask " + std::to_string(*idx) +
                                                    ", the new plan has " + std::to_string(list->size()));
                     }
                   }
                   store::SubtaskPlan plan;
                   plan.trajectory_id = id;
                   for (const auto& s : *list) {
                     if (s.find_first_not_of(" \t\n") == std::string::npos) throw InvalidArgument("subtask text is empty");
                     plan.subtasks.push_back(s);
                   }
                   plan.provenance = store::PlanProvenance::ManuallyEdited;
                   store.put_subtask_plan(plan);
                   return json{{"subtask_plan", plan}};
                 });
               }));

    server.Post("/api/trajectories/:id/decompose", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  mutate(req, res, [this](const std::string& id, const json&, const std::string&) {
                    if (!assist) throw Unavailable("no assist endpoint configured");
                    if (repo.load(id)) throw StageOrderError("decompose before stage 1 is recorded");
                    const auto t = store.get(id);
                    const auto plan = annotation::decompose_task(id, t.task_instruction, *assist);
                    store.put_subtask_plan(plan);
                    return json{{"subtask_plan", plan}};
                  });
                }));

    server.Put("/api/trajectories/:id/stage1", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 mutate(req, res, [this](const std::string& id, const json& body, const std::string& who) {
                   annotation::Stage1Input in;
                   const auto success = optional_field<bool>(body, "success");
                   if (!success) throw BadRequest("success is required");
                   in.success = *success;
                   in.keyframe_timestamp_s = optional_field<double>(body, "keyframe_timestamp_s");
                   in.failure_subtask_index = optional_field<int>(body, "failure_subtask_index");
                   if (const auto ft = optional_field<std::string>(body, "failure_type")) {
                     in.failure_type = annotation::failure_type_from_token(*ft);
                     if (!in.failure_type) throw InvalidArgument("unknown failure_type \"" + *ft + "\"");
                   }
                   const auto r = pipeline.record_stage1(repo.load(id), id, in, who);
                   repo.save(r);
                   return json{{"annotation", annotation::to_json(r)}};
                 });
               }));

    server.Put("/api/trajectories/:id/stage2", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 mutate(req, res, [this](const std::string& id, const json& body, const std::string& who) {
                   annotation::Stage2Input in;
                   in.low_level_avoidance = commands_field(body, "low_level_avoidance");
                   in.low_level_correction = commands_field(body, "low_level_correction");
                   if (const auto code = optional_field<std::string>(body, "avoidance_symbols")) {
                     in.avoidance_symbols = symbols::parse_symbol_code(*code);
                   }
                   if (const auto code = optional_field<std::string>(body, "correction_symbols")) {
                     in.correction_symbols = symbols::parse_symbol_code(*code);
                   }
                   const auto r = pipeline.record_stage2(require_record(id), in, who);
                   repo.save(r);
                   return json{{"annotation", annotation::to_json(r)}};
                 });
               }));

    server.Post("/api/trajectories/:id/assist-stage3",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  mutate(req, res, [this](const std::string& id, const json&, const std::string&) {
                    auto current = require_record(id);
                    if (!assist && !current.diagnosis.success) throw Unavailable("no assist endpoint configured");
                    endpoint::CallbackEndpoint none([](const endpoint::ChatRequest&) -> std::string {
                      throw EndpointError("no assist endpoint configured");
                    });
                    const auto r = pipeline.vlm_assist_stage3(current, assist ? *assist : none);
                    repo.save(r);
                    return json{{"annotation", annotation::to_json(r)}};
                  });
                }));

    server.Post("/api/trajectories/:id/finalize", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  mutate(req, res, [this](const std::string& id, const json& body, const std::string& who) {
                    annotation::EditedTexts edits;
                    edits.failure_reason = optional_field<std::string>(body, "failure_reason");
                    edits.high_level_avoidance = optional_field<std::string>(body, "high_level_avoidance");
                    edits.high_level_correction = optional_field<std::string>(body, "high_level_correction");
                    const auto r = pipeline.finalize(require_record(id), edits, who);
                    repo.save(r);
                    leases.release(id, who);
                    return json{{"annotation", annotation::to_json(r)}};
                  });
                }));

    server.Post("/api/symbols/validate", guarded([](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  const auto code = optional_field<std::string>(body, "code");
                  if (!code) throw BadRequest("code is required");
                  std::optional<symbols::FrameDims> dims;
                  const auto w = optional_field<int>(body, "width");
                  const auto h = optional_field<int>(body, "height");
                  if (w && h) dims = symbols::FrameDims{*w, *h};
                  const auto set = symbols::parse_symbol_code(*code);
                  const auto violations = symbols::validate_symbols(set, dims);
                  json v = json::array();
                  for (const auto& x : violations) v.push_back(violation_json(x));
                  if (symbols::has_errors(violations)) {
                    return send_error(res, 422, "ValidationError", "symbol set is invalid", v);
                  }
                  json boxes = json::array();
                  for (const auto& s : set.symbols) {
                    const auto r = symbols::symbol_footprint(s);
                    boxes.push_back({r.x0, r.y0, r.x1, r.y1});
                  }
                  send_json(res, 200, {{"valid", true},
                                       {"canonical", symbols::emit_symbol_code(set)},
                                       {"violations", v},
                                       {"footprints", boxes}});
                }));

    server.Post("/api/symbols/render", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  const auto id = optional_field<std::string>(body, "trajectory_id");
                  const auto code = optional_field<std::string>(body, "code");
                  if (!id || !code) throw BadRequest("trajectory_id and code are required");
                  require_trajectory(*id);
                  const auto set = symbols::parse_symbol_code(*code);
                  if (set.frame_index < 0 || static_cast<std::size_t>(set.frame_index) >= store.frame_count(*id)) {
                    throw NotFoundError("frame " + std::to_string(set.frame_index) + " does not exist");
                  }
                  const auto frame = store.frame_image(*id, set.frame_index);
                  const auto png = encode_png(symbols::render_overlay(frame, set));
                  res.status = 200;
                  res.set_content(std::string(png.begin(), png.end()), "image/png");
                }));

    server.Post("/api/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  const auto seed = optional_field<std::uint64_t>(body, "seed");
                  if (!seed || !body.contains("spec")) throw BadRequest("seed and spec are required");
                  const auto spec = vqa::split_spec_from_json(body["spec"]);
                  const auto views = vqa::make_views(store, repo.load_all());
                  const auto result = vqa::build_split(views, spec, *seed);
                  const std::string export_id = "export-" + std::to_string(*seed) + "-" +
                                                result.manifest.at("spec_sha256").get<std::string>().substr(0, 12);
                  vqa::write_split(config.exports_dir / export_id, result);
                  send_json(res, 200, {{"export_id", export_id}, {"manifest", result.manifest}});
                }));

    server.Post("/api/eval-runs", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  eval::EvalRunSpec spec;
                  if (const auto e = optional_field<std::string>(body, "export_id")) {
                    if (e->find('/') != std::string::npos || e->find("..") != std::string::npos) {
                      throw BadRequest("invalid export_id");
                    }
                    spec.manifest = config.exports_dir / *e / "manifest.json";
                  } else if (const auto m = optional_field<std::string>(body, "manifest")) {
                    spec.manifest = *m;
                  } else {
                    throw BadRequest("export_id or manifest is required");
                  }
                  if (!fs::exists(spec.manifest)) throw NotFoundError("no manifest at " + spec.manifest.string());
                  if (!body.contains("endpoint") || !body.contains("judge")) {
                    throw BadRequest("endpoint and judge configs are required");
                  }
                  spec.model = endpoint::endpoint_config_from_json(body["endpoint"]);
                  spec.judge = endpoint::endpoint_config_from_json(body["judge"]);
                  spec.split = optional_field<std::string>(body, "split").value_or("bench");
                  spec.media_root = config.store_root;
                  char buf[32];
                  std::snprintf(buf, sizeof buf, "run-%04d", ++run_counter);
                  const std::string run_id = buf;
                  {
                    std::lock_guard lock(runs_mutex);
                    runs[run_id] = {"running", ""};
                    run_threads.emplace_back([this, spec, run_id] {
                      RunState done{"done", ""};
                      try {
                        eval::execute_eval_run(spec, config.eval_runs_dir / run_id, config.clock);
                      } catch (const std::exception& e) {
                        done = {"failed", e.what()};
                      }
                      std::lock_guard inner(runs_mutex);
                      runs[run_id] = done;
                    });
                  }
                  send_json(res, 202, {{"run_id", run_id}, {"status", "running"}});
                }));

    server.Get("/api/eval-runs/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto id = req.path_params.at("id");
                 send_json(res, 200, run_status(id));
               }));

    server.Get("/api/eval-runs/:id/report", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto id = req.path_params.at("id");
                 const auto status = run_status(id);
                 if (status.at("status") != "done") throw NotFoundError("run " + id + " has no report yet");
                 send_json(res, 200, read_report(id));
               }));

    if (config.static_dir) server.set_mount_point("/", config.static_dir->string());
  }

  json read_report(const std::string& id) const {
    std::ifstream in(config.eval_runs_dir / id / "report.json");
    if (!in) throw NotFoundError("run " + id + " has no report");
    return json::parse(in);
  }

  json run_status(const std::string& id) {
    if (id.find('/') != std::string::npos || id.find("..") != std::string::npos) throw BadRequest("invalid run id");
    RunState state;
    {
      std::lock_guard lock(runs_mutex);
      const auto it = runs.find(id);
      if (it != runs.end()) {
        state = it->second;
      } else if (fs::exists(config.eval_runs_dir / id / "report.json")) {
        state = {"done", ""};
      } else {
        throw NotFoundError("unknown eval run " + id);
      }
    }
    json out{{"run_id", id}, {"status", state.status}, {"error", state.error}};
    if (state.status == "done") {
      const auto doc = read_report(id);
      out["run"] = doc.at("run");
      out["report"] = doc.at("report");
    }
    return out;
  }

  void stop() {
    server.stop();
    if (serve_thread.joinable()) serve_thread.join();
  }

  void wait_for_runs() {
    std::vector<std::thread> threads;
    {
      std::lock_guard lock(runs_mutex);
      threads.swap(run_threads);
    }
    for (auto& t : threads) t.join();
  }
};

ApiService::ApiService(ApiConfig config) {
  if (config.annotations_dir.empty()) config.annotations_dir = config.store_root / "annotations";
  if (config.exports_dir.empty()) config.exports_dir = config.store_root / "exports";
  if (config.eval_runs_dir.empty()) config.eval_runs_dir = config.store_root / "eval-runs";
  impl_ = std::make_unique<Impl>(std::move(config));
}

ApiService::~ApiService() = default;

int ApiService::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  impl_->serve_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ApiService::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
}

void ApiService::stop() { impl_->stop(); }

void ApiService::wait_for_runs() { impl_->wait_for_runs(); }

}  // namespace symguide::api
