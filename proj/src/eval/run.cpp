#include "symguide/eval/run.hpp"

#include <fstream>

#include "symguide/common/errors.hpp"
#include "symguide/endpoint/http_client.hpp"
#include "symguide/vqa/split.hpp"

namespace symguide::eval {

using nlohmann::json;

EvalRunOutcome execute_eval_run(const EvalRunSpec& spec, const std::filesystem::path& out_dir,
                                endpoint::ChatEndpoint& model, endpoint::ChatEndpoint& judge,
                                const Clock& clock) {
  const std::string started = format_utc(clock());
  std::ifstream in(spec.manifest);
  if (!in) throw IoError("cannot open " + spec.manifest.string());
  const auto manifest = json::parse(in, nullptr, false);
  if (manifest.is_discarded()) throw InvalidArgument(spec.manifest.string() + " is not JSON");
  const auto pairs = vqa::read_split(spec.manifest, spec.split);

  RunOptions options;
  options.concurrency = static_cast<std::size_t>(std::max(1, spec.model.max_in_flight));
  options.judge_scale = spec.judge.judge_scale;
  EvalRunOutcome out;
  out.items = run_benchmark(pairs, model, judge, file_media(spec.media_root), options);
  out.report = aggregate_report(out.items);

  std::map<std::string, std::size_t> per_type;
  for (const auto& p : pairs) ++per_type[std::string(vqa::to_token(p.question_type))];
  out.metadata = json{{"manifest", spec.manifest.string()},
                      {"split", spec.split},
                      {"seed", manifest.value("seed", json(nullptr))},
                      {"spec_sha256", manifest.value("spec_sha256", json(nullptr))},
                      {"model_endpoint", endpoint::to_json(spec.model)},
                      {"judge_endpoint", endpoint::to_json(spec.judge)},
                      {"pair_count", pairs.size()},
                      {"pairs_per_type", per_type},
                      {"started_at", started},
                      {"finished_at", format_utc(clock())}};
  write_eval_run(out_dir, out.items, out.report, out.metadata);
  return out;
}

EvalRunOutcome execute_eval_run(const EvalRunSpec& spec, const std::filesystem::path& out_dir,
                                const Clock& clock) {
  endpoint::HttpChatClient model(spec.model);
  endpoint::HttpChatClient judge(spec.judge);
  return execute_eval_run(spec, out_dir, model, judge, clock);
}

}  // namespace symguide::eval
