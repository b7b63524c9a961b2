// Command-line front end: ingest, stats, symbols, vqa, eval, supervise, serve.

#include <csignal>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "symguide/annotation/repository.hpp"
#include "symguide/api/service.hpp"
#include "symguide/common/errors.hpp"
#include "symguide/endpoint/http_client.hpp"
#include "symguide/eval/run.hpp"
#include "symguide/store/store.hpp"
#include "symguide/supervisor/session.hpp"
#include "symguide/symbols/codec.hpp"
#include "symguide/symbols/render.hpp"
#include "symguide/vqa/split.hpp"

using namespace symguide;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

json read_json(const fs::path& p) {
  const auto j = json::parse(read_text(p), nullptr, false);
  if (j.is_discarded()) throw InvalidArgument(p.string() + " is not valid JSON");
  return j;
}

api::ApiService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Failure annotation, VQA generation, evaluation and supervision toolkit"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Copy a trajectory (metadata + media) into the store");
  fs::path store_root, meta_file, head;
  std::vector<fs::path> wrist;
  ingest->add_option("--store", store_root, "Store root")->required();
  ingest->add_option("--meta", meta_file, "Trajectory metadata JSON")->required()->check(CLI::ExistingFile);
  ingest->add_option("--head", head, "Head view: frame directory or video file")->required()->check(CLI::ExistingPath);
  ingest->add_option("--wrist", wrist, "Wrist views (up to two)")->check(CLI::ExistingPath);

  // stats
  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  fs::path stats_store, stats_annotations;
  std::string success_filter;
  stats->add_option("--store", stats_store, "Store root")->required();
  stats->add_option("--annotations", stats_annotations, "Annotation directory (adds failure-type counts)");
  stats->add_option("--success", success_filter, "Only successes (true) or failures (false)")
      ->check(CLI::IsMember({"true", "false"}));

  // symbols
  auto* sym = app.add_subcommand("symbols", "Symbol code tools");
  sym->require_subcommand(1);
  auto* sym_validate = sym->add_subcommand("validate", "Validate symbol code and print the canonical form");
  fs::path code_file;
  int width = 0, height = 0;
  sym_validate->add_option("code", code_file, "Symbol code file")->required()->check(CLI::ExistingFile);
  sym_validate->add_option("--width", width, "Frame width for bounds checks");
  sym_validate->add_option("--height", height, "Frame height for bounds checks");
  auto* sym_render = sym->add_subcommand("render", "Draw symbols onto a frame");
  fs::path render_code, render_frame, render_out;
  sym_render->add_option("code", render_code, "Symbol code file")->required()->check(CLI::ExistingFile);
  sym_render->add_option("--frame", render_frame, "Input frame (.png or .ppm)")->required()->check(CLI::ExistingFile);
  sym_render->add_option("--out", render_out, "Output image (.png or .ppm)")->required();

  // vqa
  auto* vqa_cmd = app.add_subcommand("vqa", "VQA dataset tools");
  vqa_cmd->require_subcommand(1);
  auto* gen = vqa_cmd->add_subcommand("generate", "Generate train/bench splits from finalized annotations");
  fs::path gen_store, gen_annotations, gen_spec, gen_out;
  std::uint64_t gen_seed = 0;
  gen->add_option("--store", gen_store, "Store root")->required();
  gen->add_option("--annotations", gen_annotations, "Annotation directory (default <store>/annotations)");
  gen->add_option("--spec", gen_spec, "Split spec JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", gen_seed, "Seed")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Benchmark evaluation");
  eval_cmd->require_subcommand(1);
  auto* eval_run = eval_cmd->add_subcommand("run", "Evaluate a model endpoint on a split");
  eval::EvalRunSpec run_spec;
  fs::path endpoint_cfg, judge_cfg, run_out;
  eval_run->add_option("--bench", run_spec.manifest, "manifest.json of a generated split")->required()->check(CLI::ExistingFile);
  eval_run->add_option("--endpoint", endpoint_cfg, "Model endpoint config JSON")->required()->check(CLI::ExistingFile);
  eval_run->add_option("--judge", judge_cfg, "Judge endpoint config JSON")->required()->check(CLI::ExistingFile);
  eval_run->add_option("--out", run_out, "Run output directory")->required();
  eval_run->add_option("--split", run_spec.split, "Split to evaluate")->capture_default_str();
  eval_run->add_option("--media-root", run_spec.media_root, "Trajectory store root for media (default: current directory)");
  auto* eval_report = eval_cmd->add_subcommand("report", "Recompute a report from a run's items.jsonl");
  fs::path report_dir;
  eval_report->add_option("run", report_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  // supervise
  auto* sup = app.add_subcommand("supervise", "Run the correction supervisor against an adapter");
  fs::path sup_config, sup_log;
  std::string adapter_spec;
  std::int64_t max_steps = 1000;
  sup->add_option("--config", sup_config, "Supervisor config JSON")->required()->check(CLI::ExistingFile);
  sup->add_option("--adapter", adapter_spec, "scripted:<nominal|fail_then_recover|adapter_fault>")->required();
  sup->add_option("--log", sup_log, "Session log output (JSON lines)");
  sup->add_option("--max-steps", max_steps, "Step limit")->capture_default_str();

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the annotation API");
  api::ApiConfig api_config;
  std::string host = "127.0.0.1";
  int port = 8080;
  fs::path static_dir, assist_cfg;
  serve->add_option("--store", api_config.store_root, "Store root")->required();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--static", static_dir, "UI bundle directory")->check(CLI::ExistingDirectory);
  serve->add_option("--assist", assist_cfg, "Assist endpoint config JSON")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      store::TrajectoryStore store(store_root);
      store::TrajectoryRecord meta = read_json(meta_file).get<store::TrajectoryRecord>();
      std::cout << store.ingest(meta, {head, wrist}) << "\n";
    } else if (*stats) {
      store::TrajectoryStore store(stats_store);
      store::StatsFilter filter;
      if (!success_filter.empty()) filter.success = success_filter == "true";
      store::FailureTypeLookup lookup;
      std::unique_ptr<annotation::AnnotationRepository> repo;
      if (!stats_annotations.empty()) {
        repo = std::make_unique<annotation::AnnotationRepository>(stats_annotations);
        lookup = [&](const std::string& id) -> std::optional<std::string> {
          const auto r = repo->load(id);
          if (!r || !r->diagnosis.failure_type) return std::nullopt;
          return std::string(annotation::to_token(*r->diagnosis.failure_type));
        };
      }
      const auto s = store.stats(filter, lookup);
      json hist = json::array();
      for (auto n : s.duration_histogram) hist.push_back(n);
      std::cout << json{{"total", s.total},
                        {"successes", s.successes},
                        {"failures", s.failures},
                        {"by_source", s.by_source},
                        {"by_failure_type", s.by_failure_type},
                        {"duration_bin_edges_s", store::kDurationBinEdges},
                        {"duration_histogram", hist}}
                       .dump(2)
                << "\n";
    } else if (*sym_validate) {
      std::optional<symbols::FrameDims> dims;
      if (width > 0 && height > 0) dims = symbols::FrameDims{width, height};
      const auto set = symbols::parse_symbol_code(read_text(code_file));
      const auto violations = symbols::validate_symbols(set, dims);
      for (const auto& v : violations) {
        std::cerr << (v.severity == symbols::Severity::Error ? "error: " : "warning: ")
                  << symbols::to_token(v.code) << ": " << v.message << "\n";
      }
      if (symbols::has_errors(violations)) return 1;
      std::cout << symbols::emit_symbol_code(set);
    } else if (*sym_render) {
      const auto frame = load_image(render_frame);
      const auto set = symbols::parse_symbol_code(read_text(render_code), symbols::FrameDims{frame.width, frame.height});
      save_image(render_out, symbols::render_overlay(frame, set));
    } else if (*gen) {
      store::TrajectoryStore store(gen_store);
      annotation::AnnotationRepository repo(gen_annotations.empty() ? gen_store / "annotations" : gen_annotations);
      const auto spec = vqa::split_spec_from_json(read_json(gen_spec));
      const auto result = vqa::build_split(vqa::make_views(store, repo.load_all()), spec, gen_seed);
      vqa::write_split(gen_out, result);
      std::cout << result.manifest.at("splits").dump(2) << "\n";
    } else if (*eval_run) {
      run_spec.model = endpoint::load_endpoint_config(endpoint_cfg);
      run_spec.judge = endpoint::load_endpoint_config(judge_cfg);
      if (run_spec.media_root.empty()) run_spec.media_root = fs::current_path();
      const auto outcome = eval::execute_eval_run(run_spec, run_out);
      std::cout << eval::report_table(outcome.report);
    } else if (*eval_report) {
      std::cout << eval::report_table(eval::recompute_report(report_dir));
    } else if (*sup) {
      const auto config = supervisor::load_supervisor_config(sup_config);
      const std::string prefix = "scripted:";
      if (adapter_spec.rfind(prefix, 0) != 0) throw InvalidArgument("only scripted:<scenario> adapters are built in");
      supervisor::ScriptedAdapter adapter(supervisor::named_scenario(adapter_spec.substr(prefix.size())));
      std::unique_ptr<endpoint::ChatEndpoint> vlm;
      if (config.endpoint) {
        vlm = std::make_unique<endpoint::HttpChatClient>(*config.endpoint);
      } else {
        vlm = std::make_unique<endpoint::CallbackEndpoint>(supervisor::scripted_vlm_reply);
      }
      supervisor::FixedGraspEstimator grasp;
      supervisor::SessionOptions options;
      options.max_steps = max_steps;
      options.grasp_estimator = &grasp;
      const auto log = supervisor::run_session(config, adapter, *vlm, options);
      if (!sup_log.empty()) supervisor::write_session_log(sup_log, log);
      std::cout << supervisor::to_json(log.summary).dump(2) << "\n";
      return log.aborted() ? 3 : 0;
    } else if (*serve) {
      if (!static_dir.empty()) api_config.static_dir = static_dir;
      if (!assist_cfg.empty()) api_config.assist_endpoint = endpoint::load_endpoint_config(assist_cfg);
      api::ApiService service(api_config);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving on " << host << ":" << port << "\n";
      service.run(host, port);
      g_service = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << e.kind() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
