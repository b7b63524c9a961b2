#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "symguide/common/clock.hpp"
#include "symguide/endpoint/chat.hpp"
#include "symguide/endpoint/config.hpp"

namespace symguide::api {

inline constexpr int kApiSchemaVersion = 1;

struct ApiConfig {
  std::filesystem::path store_root;
  std::filesystem::path annotations_dir;  // default <store_root>/annotations
  std::filesystem::path exports_dir;      // default <store_root>/exports
  std::filesystem::path eval_runs_dir;    // default <store_root>/eval-runs
  std::optional<std::filesystem::path> static_dir;  // UI bundle served at /
  // Endpoint for task decomposition and stage-3 drafts. Either a config
  // (an HTTP client is built) or an injected endpoint; neither disables the
  // assist routes (503).
  std::optional<endpoint::ModelEndpointConfig> assist_endpoint;
  std::shared_ptr<endpoint::ChatEndpoint> assist;
  Clock clock = system_clock();
  std::chrono::seconds lease_duration = std::chrono::minutes(10);
};

// JSON-over-HTTP front for the store, the annotation pipeline, dataset
// export and eval runs. Routes (all bodies and replies are JSON unless noted,
// every JSON reply has "schema_version"):
//
//   GET    /api/health
//   GET    /api/style                               glyph geometry and colors
//   GET    /api/trajectories
//   GET    /api/trajectories/{id}
//   GET    /api/trajectories/{id}/frames/{index}    raw image bytes (?view=head|wrist0|wrist1)
//   GET    /api/trajectories/{id}/annotation
//   POST   /api/trajectories/{id}/lease             acquire or renew
//   DELETE /api/trajectories/{id}/lease
//   PUT    /api/trajectories/{id}/subtasks          {"subtasks": [...]}
//   POST   /api/trajectories/{id}/decompose
//   PUT    /api/trajectories/{id}/stage1
//   PUT    /api/trajectories/{id}/stage2
//   POST   /api/trajectories/{id}/assist-stage3
//   POST   /api/trajectories/{id}/finalize
//   POST   /api/symbols/validate                    {"code", "width", "height"}
//   POST   /api/symbols/render                      {"trajectory_id", "code"} -> PNG
//   POST   /api/export                              {"seed", "spec"}
//   POST   /api/eval-runs                           {"export_id"|"manifest", "endpoint", "judge"}
//   GET    /api/eval-runs/{id}
//   GET    /api/eval-runs/{id}/report
//
// Mutating trajectory routes need an annotator id (X-Annotator-Id header or
// "annotator_id" field) and take or renew that annotator's lease; another
// holder's live lease gives 409. Validation failures give 422 with
// {"error": {"kind", "message"}, "violations": [...]}; unknown ids 404;
// malformed requests 400.
class ApiService {
 public:
  explicit ApiService(ApiConfig config);
  ~ApiService();
  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  // Binds and serves on a background thread; returns the bound port
  // (port 0 picks a free one). Throws IoError when binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();
  // Waits for background eval runs to finish.
  void wait_for_runs();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace symguide::api
