#include "symguide/eval/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "symguide/common/errors.hpp"
#include "symguide/common/parallel.hpp"
#include "symguide/symbols/codec.hpp"
#include "symguide/symbols/image.hpp"

namespace symguide::eval {

using nlohmann::json;
using vqa::QuestionType;
using vqa::VqaPair;

std::string_view split_of(QuestionType type) {
  if (vqa::is_closed(type)) return "lite";
  if (vqa::is_open(type)) return "hard";
  return "visual";
}

json to_json(const ItemResult& r) {
  json j{{"pair_id", r.pair_id},
         {"question_type", vqa::to_token(r.question_type)},
         {"split", split_of(r.question_type)},
         {"response", r.response},
         {"correct", r.correct},
         {"score", r.score},
         {"errored", r.errored},
         {"flagged", r.flagged},
         {"error", r.error}};
  j["extracted"] = r.extracted ? json(std::string(1, *r.extracted)) : json(nullptr);
  j["judge"] = r.judge ? to_json(*r.judge) : json(nullptr);
  j["symbol_reason"] = r.symbol_reason ? json(*r.symbol_reason) : json(nullptr);
  return j;
}

ItemResult item_result_from_json(const json& j) {
  try {
    ItemResult r;
    r.pair_id = j.at("pair_id").get<std::string>();
    const auto type = vqa::question_type_from_token(j.at("question_type").get<std::string>());
    if (!type) throw InvalidArgument("unknown question_type in item " + r.pair_id);
    r.question_type = *type;
    r.response = j.value("response", "");
    if (j.contains("extracted") && j["extracted"].is_string() && !j["extracted"].get<std::string>().empty()) {
      r.extracted = j["extracted"].get<std::string>()[0];
    }
    if (j.contains("judge") && !j["judge"].is_null()) r.judge = judge_score_from_json(j["judge"]);
    if (j.contains("symbol_reason") && !j["symbol_reason"].is_null()) {
      r.symbol_reason = j["symbol_reason"].get<std::string>();
    }
    r.correct = j.at("correct").get<bool>();
    r.score = j.at("score").get<double>();
    r.errored = j.at("errored").get<bool>();
    r.flagged = j.at("flagged").get<bool>();
    r.error = j.value("error", "");
    return r;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("item result: ") + e.what());
  }
}

MediaResolver file_media(std::filesystem::path root) {
  return [root = std::move(root)](const VqaPair& pair) {
    std::vector<endpoint::ChatImage> images;
    for (const auto& m : pair.media) {
      const auto path = root / m.path;
      const auto ext = path.extension().string();
      images.push_back({ext == ".ppm" ? "image/x-portable-pixmap" : "image/png", read_file_bytes(path)});
    }
    return images;
  };
}

MediaResolver no_media() {
  return [](const VqaPair&) { return std::vector<endpoint::ChatImage>{}; };
}

endpoint::ChatRequest pair_request(const VqaPair& pair, const MediaResolver& media) {
  endpoint::ChatRequest req;
  req.messages.push_back({"user", pair.prompt, media(pair)});
  return req;
}

namespace {

template <class Fn>
std::vector<ItemResult> run_each(const std::vector<VqaPair>& pairs, const RunOptions& options, Fn&& one) {
  std::vector<ItemResult> out(pairs.size());
  parallel_for(pairs.size(), options.concurrency, [&](std::size_t i) {
    ItemResult r;
    r.pair_id = pairs[i].id;
    r.question_type = pairs[i].question_type;
    try {
      one(pairs[i], r);
    } catch (const EndpointError& e) {
      r.errored = true;
      r.correct = false;
      r.score = 0;
      r.error = e.what();
    } catch (const IoError& e) {
      r.errored = true;
      r.score = 0;
      r.error = e.what();
    }
    out[i] = std::move(r);
  });
  return out;
}

void score_closed(const VqaPair& p, ItemResult& r, endpoint::ChatEndpoint& model, const MediaResolver& media) {
  if (!vqa::is_closed(p.question_type)) throw InvalidArgument(p.id + " is not closed-ended");
  r.response = model.complete(pair_request(p, media)).text;
  r.extracted = extract_choice(r.response, p.options);
  r.correct = r.extracted && std::string(1, *r.extracted) == p.answer;
  r.score = r.correct ? 100.0 : 0.0;
}

void score_open(const VqaPair& p, ItemResult& r, endpoint::ChatEndpoint& model,
                endpoint::ChatEndpoint& judge, const MediaResolver& media, double scale) {
  if (!vqa::is_open(p.question_type)) throw InvalidArgument(p.id + " is not open-ended");
  r.response = model.complete(pair_request(p, media)).text;
  const std::string prompt = judge_prompt(p.prompt, p.answer_text, r.response, scale);
  for (int attempt = 0; attempt < 2; ++attempt) {
    endpoint::ChatRequest req;
    req.messages.push_back({"user", attempt == 0 ? prompt : prompt + judge_format_reminder(), {}});
    const auto reply = judge.complete(req);
    try {
      r.judge = parse_judge_response(reply.text, scale);
      r.score = r.judge->total;
      r.correct = true;
      return;
    } catch (const JudgeParseError& e) {
      r.error = e.what();
    }
  }
  r.flagged = true;
  r.correct = false;
  r.score = 0;
}

void score_visual(const VqaPair& p, ItemResult& r, endpoint::ChatEndpoint& model, const MediaResolver& media) {
  if (!p.symbol_code_answer || !p.frame_width || !p.frame_height) {
    throw InvalidArgument(p.id + " lacks a symbol-code answer or frame size");
  }
  r.response = model.complete(pair_request(p, media)).text;
  const auto truth = symbols::parse_symbol_code(*p.symbol_code_answer, std::nullopt);
  const auto s = score_symbol_code(r.response, truth, {*p.frame_width, *p.frame_height});
  r.symbol_reason = std::string(to_token(s.reason));
  r.correct = s.match;
  r.score = s.match ? 100.0 : 0.0;
  if (!s.match) r.error = s.detail;
}

}  // namespace

std::vector<ItemResult> run_closed_eval(const std::vector<VqaPair>& pairs, endpoint::ChatEndpoint& model,
                                        const MediaResolver& media, const RunOptions& options) {
  return run_each(pairs, options, [&](const VqaPair& p, ItemResult& r) { score_closed(p, r, model, media); });
}

std::vector<ItemResult> run_open_eval(const std::vector<VqaPair>& pairs, endpoint::ChatEndpoint& model,
                                      endpoint::ChatEndpoint& judge, const MediaResolver& media,
                                      const RunOptions& options) {
  return run_each(pairs, options, [&](const VqaPair& p, ItemResult& r) {
    score_open(p, r, model, judge, media, options.judge_scale);
  });
}

std::vector<ItemResult> run_visual_eval(const std::vector<VqaPair>& pairs, endpoint::ChatEndpoint& model,
                                        const MediaResolver& media, const RunOptions& options) {
  return run_each(pairs, options, [&](const VqaPair& p, ItemResult& r) { score_visual(p, r, model, media); });
}

std::vector<ItemResult> run_benchmark(const std::vector<VqaPair>& pairs, endpoint::ChatEndpoint& model,
                                      endpoint::ChatEndpoint& judge, const MediaResolver& media,
                                      const RunOptions& options) {
  return run_each(pairs, options, [&](const VqaPair& p, ItemResult& r) {
    if (vqa::is_closed(p.question_type)) {
      score_closed(p, r, model, media);
    } else if (vqa::is_open(p.question_type)) {
      score_open(p, r, model, judge, media, options.judge_scale);
    } else {
      score_visual(p, r, model, media);
    }
  });
}

namespace {

std::optional<double> mean_of(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

EvalReport aggregate_report(std::vector<ItemResult> items) {
  std::sort(items.begin(), items.end(),
            [](const ItemResult& a, const ItemResult& b) { return a.pair_id < b.pair_id; });
  EvalReport report;
  std::map<std::string, double> sums;
  std::vector<double> weighted, visual;
  for (const auto& r : items) {
    const std::string type(vqa::to_token(r.question_type));
    auto& t = report.per_type[type];
    ++t.items;
    ++report.total_items;
    if (r.errored) {
      ++t.errored;
      ++report.errored_items;
    }
    if (r.flagged) {
      ++t.flagged;
      ++report.flagged_items;
      continue;
    }
    ++t.scored;
    sums[type] += r.score;
    if (split_of(r.question_type) == "visual") {
      visual.push_back(r.score);
    } else {
      weighted.push_back(r.score);
    }
  }
  for (auto& [type, t] : report.per_type) {
    if (t.scored > 0) t.accuracy = sums[type] / static_cast<double>(t.scored);
  }
  std::vector<double> lite, hard;
  for (auto type : vqa::kBenchmarkTypes) {
    const auto it = report.per_type.find(std::string(vqa::to_token(type)));
    if (it == report.per_type.end() || it->second.scored == 0) continue;
    (vqa::is_closed(type) ? lite : hard).push_back(it->second.accuracy);
  }
  report.lite_average = mean_of(lite);
  report.hard_average = mean_of(hard);
  if (report.lite_average && report.hard_average) {
    report.overall_average = (*report.lite_average + *report.hard_average) / 2.0;
  } else {
    report.overall_average = report.lite_average ? report.lite_average : report.hard_average;
  }
  report.item_weighted_average = mean_of(weighted);
  if (!visual.empty()) report.visual_match_rate = mean_of(visual);
  if (weighted.empty() && visual.empty()) throw EmptyResults("no scored items");
  return report;
}

json to_json(const EvalReport& r) {
  json per_type = json::object();
  for (const auto& [type, t] : r.per_type) {
    per_type[type] = {{"items", t.items},
                      {"scored", t.scored},
                      {"errored", t.errored},
                      {"flagged", t.flagged},
                      {"accuracy", t.accuracy},
                      {"split", split_of(*vqa::question_type_from_token(type))}};
  }
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{{"per_type", per_type},
              {"lite_average", opt(r.lite_average)},
              {"hard_average", opt(r.hard_average)},
              {"overall_average", opt(r.overall_average)},
              {"item_weighted_average", opt(r.item_weighted_average)},
              {"visual_match_rate", opt(r.visual_match_rate)},
              {"total_items", r.total_items},
              {"errored_items", r.errored_items},
              {"flagged_items", r.flagged_items}};
}

std::string report_table(const EvalReport& r) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-32s %-6s %7s %7s %7s %9s\n", "question type", "split", "items",
                "errored", "flagged", "accuracy");
  out += line;
  for (auto type : vqa::kAllQuestionTypes) {
    const auto it = r.per_type.find(std::string(vqa::to_token(type)));
    if (it == r.per_type.end()) continue;
    const auto& t = it->second;
    std::snprintf(line, sizeof line, "%-32s %-6s %7zu %7zu %7zu %9.2f\n", it->first.c_str(),
                  std::string(split_of(type)).c_str(), t.items, t.errored, t.flagged, t.accuracy);
    out += line;
  }
  auto row = [&](const char* name, const std::optional<double>& v) {
    if (v) {
      std::snprintf(line, sizeof line, "%-32s %9.2f\n", name, *v);
    } else {
      std::snprintf(line, sizeof line, "%-32s %9s\n", name, "n/a");
    }
    out += line;
  };
  out += "\n";
  row("Lite average", r.lite_average);
  row("Hard average", r.hard_average);
  row("Overall (mean of Lite, Hard)", r.overall_average);
  row("Item-weighted average", r.item_weighted_average);
  row("Visual guidance match rate", r.visual_match_rate);
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << text;
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_eval_run(const std::filesystem::path& dir, const std::vector<ItemResult>& items,
                    const EvalReport& report, const json& run_metadata) {
  std::filesystem::create_directories(dir);
  auto sorted = items;
  std::sort(sorted.begin(), sorted.end(),
            [](const ItemResult& a, const ItemResult& b) { return a.pair_id < b.pair_id; });
  std::string lines;
  for (const auto& r : sorted) lines += to_json(r).dump() + "\n";
  write_text(dir / "items.jsonl", lines);
  const json doc{{"schema_version", 1}, {"run", run_metadata}, {"report", to_json(report)}};
  write_text(dir / "report.json", doc.dump(2) + "\n");
  write_text(dir / "report.txt", report_table(report));
}

std::vector<ItemResult> read_items_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<ItemResult> items;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      items.push_back(item_result_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw InvalidArgument(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return items;
}

EvalReport recompute_report(const std::filesystem::path& dir) {
  return aggregate_report(read_items_jsonl(dir / "items.jsonl"));
}

}  // namespace symguide::eval
