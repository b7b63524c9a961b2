#include "symguide/eval/symbol_score.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "symguide/common/errors.hpp"
#include "symguide/symbols/codec.hpp"

namespace symguide::eval {

using symbols::SymbolInstance;

std::string_view to_token(SymbolMatchReason r) {
  switch (r) {
    case SymbolMatchReason::Match: return "match";
    case SymbolMatchReason::ParseFail: return "parse_fail";
    case SymbolMatchReason::KindMismatch: return "kind_mismatch";
    case SymbolMatchReason::AttributeMismatch: return "attribute_mismatch";
    case SymbolMatchReason::PointError: return "point_error";
  }
  return "";
}

namespace {

int attribute_mismatches(const SymbolInstance& a, const SymbolInstance& b) {
  return (a.color != b.color) + (a.rotation_dir != b.rotation_dir) +
         (a.gripper_state != b.gripper_state) + (a.arm != b.arm);
}

double distance(symbols::Point a, symbols::Point b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

double point_error(const SymbolInstance& a, const SymbolInstance& b) {
  double e = distance(a.start, b.start);
  if (a.end && b.end) e = std::max(e, distance(*a.end, *b.end));
  return e;
}

struct Pairing {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (generated, truth)
};

// Exact assignment by DP over subsets of `truth` for groups up to 16,
// greedy beyond that.
Pairing assign(const std::vector<std::size_t>& gen, const std::vector<std::size_t>& tru,
               const std::vector<SymbolInstance>& g, const std::vector<SymbolInstance>& t) {
  const std::size_t n = gen.size();
  auto cost = [&](std::size_t i, std::size_t j) {
    return attribute_mismatches(g[gen[i]], t[tru[j]]) * 1e9 + point_error(g[gen[i]], t[tru[j]]);
  };
  Pairing out;
  if (n <= 16) {
    const std::size_t full = std::size_t{1} << n;
    std::vector<double> best(full, std::numeric_limits<double>::infinity());
    std::vector<int> choice(full, -1);
    best[0] = 0;
    for (std::size_t mask = 0; mask < full; ++mask) {
      if (best[mask] == std::numeric_limits<double>::infinity()) continue;
      const std::size_t i = static_cast<std::size_t>(__builtin_popcountll(mask));
      if (i == n) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (mask & (std::size_t{1} << j)) continue;
        const std::size_t next = mask | (std::size_t{1} << j);
        const double c = best[mask] + cost(i, j);
        if (c < best[next]) {
          best[next] = c;
          choice[next] = static_cast<int>(j);
        }
      }
    }
    for (std::size_t mask = full - 1, i = n; i > 0; --i) {
      const auto j = static_cast<std::size_t>(choice[mask]);
      out.pairs.emplace_back(gen[i - 1], tru[j]);
      mask &= ~(std::size_t{1} << j);
    }
    return out;
  }
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pick = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!used[j] && cost(i, j) < best) {
        best = cost(i, j);
        pick = j;
      }
    }
    used[pick] = true;
    out.pairs.emplace_back(gen[i], tru[pick]);
  }
  return out;
}

}  // namespace

SymbolScore score_symbol_code(std::string_view generated, const symbols::SymbolSet& truth,
                              symbols::FrameDims dims) {
  SymbolScore score;
  score.tolerance = kPointTolerance * std::hypot(static_cast<double>(dims.width),
                                                 static_cast<double>(dims.height));
  symbols::SymbolSet parsed;
  try {
    const auto block = symbols::extract_symbol_code(generated);
    parsed = symbols::parse_symbol_code(block ? std::string_view(*block) : generated, std::nullopt);
  } catch (const Error& e) {
    score.reason = SymbolMatchReason::ParseFail;
    score.detail = e.what();
    return score;
  }

  std::map<symbols::SymbolKind, std::vector<std::size_t>> gen_by_kind, truth_by_kind;
  for (std::size_t i = 0; i < parsed.symbols.size(); ++i) gen_by_kind[parsed.symbols[i].kind].push_back(i);
  for (std::size_t i = 0; i < truth.symbols.size(); ++i) truth_by_kind[truth.symbols[i].kind].push_back(i);
  bool same_kinds = gen_by_kind.size() == truth_by_kind.size();
  for (const auto& [kind, idx] : truth_by_kind) {
    const auto it = gen_by_kind.find(kind);
    same_kinds = same_kinds && it != gen_by_kind.end() && it->second.size() == idx.size();
  }
  if (!same_kinds) {
    score.reason = SymbolMatchReason::KindMismatch;
    score.detail = "expected " + std::to_string(truth.symbols.size()) + " symbols, got " +
                   std::to_string(parsed.symbols.size()) + " with a different kind multiset";
    return score;
  }

  int mismatched = 0;
  for (const auto& [kind, tru] : truth_by_kind) {
    for (const auto& [gi, ti] : assign(gen_by_kind[kind], tru, parsed.symbols, truth.symbols).pairs) {
      mismatched += attribute_mismatches(parsed.symbols[gi], truth.symbols[ti]) > 0;
      score.max_point_error = std::max(score.max_point_error, point_error(parsed.symbols[gi], truth.symbols[ti]));
    }
  }
  if (mismatched > 0) {
    score.reason = SymbolMatchReason::AttributeMismatch;
    score.detail = std::to_string(mismatched) + " matched symbols differ in color, rotation, state or arm";
  } else if (score.max_point_error > score.tolerance) {
    score.reason = SymbolMatchReason::PointError;
    score.detail = "point error " + std::to_string(score.max_point_error) + " px exceeds " +
                   std::to_string(score.tolerance) + " px";
  } else {
    score.match = true;
    score.reason = SymbolMatchReason::Match;
  }
  return score;
}

}  // namespace symguide::eval
