#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "symguide/annotation/commands.hpp"

namespace symguide::vqa {

// Hard-coded common actions written with an "{arm}" placeholder, e.g.
// "Hold the {arm} arm still". Each template must render to a vocabulary
// command for both arms.
struct StaticPool {
  std::vector<std::string> templates;

  std::vector<std::string> render(symbols::Arm arm) const;
};

StaticPool default_static_pool();
StaticPool load_static_pool(const std::filesystem::path& path);  // {"templates": [...]}

// Three wrong options for a low-level guidance question whose truth is
// `truth` (one or more commands). Each distractor keeps the truth's command
// count and arm at every position and differs from it at exactly one
// position; candidates at a position come from the static pool and from
// `dynamic_pool` restricted to that position's arm. Texts are unique and
// never equal the truth. InsufficientPool when fewer than 3 exist.
std::vector<std::string> gen_low_level_distractors(
    const std::vector<annotation::LowLevelCommand>& truth, const StaticPool& static_pool,
    const std::vector<annotation::LowLevelCommand>& dynamic_pool, std::uint64_t seed);

// Every vocabulary command for both arms.
std::vector<annotation::LowLevelCommand> full_dynamic_pool();

}  // namespace symguide::vqa
