#include "symguide/vqa/distractors.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "json.hpp"
#include "symguide/common/errors.hpp"
#include "symguide/common/random.hpp"

namespace symguide::vqa {

using annotation::LowLevelCommand;
using symbols::Arm;

namespace {

std::string fill_arm(const std::string& tmpl, Arm arm) {
  const std::string word = arm == Arm::Left ? "left" : "right";
  std::string out = tmpl;
  for (auto pos = out.find("{arm}"); pos != std::string::npos; pos = out.find("{arm}", pos)) {
    out.replace(pos, 5, word);
  }
  return out;
}

void check_templates(const StaticPool& pool) {
  for (const auto& t : pool.templates) {
    if (t.find("{arm}") == std::string::npos) {
      throw InvalidArgument("static distractor lacks an {arm} placeholder: " + t);
    }
    for (Arm arm : {Arm::Left, Arm::Right}) {
      const auto cmd = annotation::parse_command(fill_arm(t, arm));
      if (!cmd || cmd->arm != arm) {
        throw InvalidArgument("static distractor is not a vocabulary command: " + t);
      }
    }
  }
}

}  // namespace

std::vector<std::string> StaticPool::render(Arm arm) const {
  std::vector<std::string> out;
  for (const auto& t : templates) {
    out.push_back(annotation::render_command(*annotation::parse_command(fill_arm(t, arm))));
  }
  return out;
}

StaticPool default_static_pool() {
  return StaticPool{{"Hold the {arm} arm still", "Open the {arm} gripper",
                     "Close the {arm} gripper", "Move the {arm} arm back to its initial pose"}};
}

StaticPool load_static_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("templates") || !j["templates"].is_array()) {
    throw InvalidArgument(path.string() + ": expected {\"templates\": [...]}");
  }
  StaticPool pool{j["templates"].get<std::vector<std::string>>()};
  check_templates(pool);
  return pool;
}

std::vector<LowLevelCommand> full_dynamic_pool() {
  auto pool = annotation::command_vocabulary(Arm::Left);
  for (const auto& c : annotation::command_vocabulary(Arm::Right)) pool.push_back(c);
  return pool;
}

std::vector<std::string> gen_low_level_distractors(const std::vector<LowLevelCommand>& truth,
                                                   const StaticPool& static_pool,
                                                   const std::vector<LowLevelCommand>& dynamic_pool,
                                                   std::uint64_t seed) {
  if (truth.empty()) throw InvalidArgument("low-level truth has no commands");
  check_templates(static_pool);
  std::vector<std::string> truth_text;
  for (const auto& c : truth) truth_text.push_back(annotation::render_command(c));
  const std::string truth_joined = annotation::render_commands(truth);

  // Candidates in a fixed order (static first, then dynamic), deduplicated.
  std::vector<std::string> candidates;
  std::set<std::string> seen{truth_joined};
  for (std::size_t pos = 0; pos < truth.size(); ++pos) {
    const Arm arm = truth[pos].arm;
    std::vector<std::string> alternatives = static_pool.render(arm);
    for (const auto& c : dynamic_pool) {
      if (c.arm == arm) alternatives.push_back(annotation::render_command(c));
    }
    for (const auto& alt : alternatives) {
      if (alt == truth_text[pos]) continue;
      auto variant = truth_text;
      variant[pos] = alt;
      std::string joined;
      for (const auto& v : variant) joined += (joined.empty() ? "" : "; ") + v;
      if (seen.insert(joined).second) candidates.push_back(joined);
    }
  }
  if (candidates.size() < 3) {
    throw InsufficientPool("only " + std::to_string(candidates.size()) +
                           " distinct low-level distractors for \"" + truth_joined + "\"");
  }
  Rng rng(seed);
  rng.shuffle(candidates);
  candidates.resize(3);
  return candidates;
}

}  // namespace symguide::vqa
