#include "symguide/eval/choice.hpp"

#include <cctype>

namespace symguide::eval {

std::optional<char> extract_choice(std::string_view response,
                                   const std::vector<std::string>& options) {
  if (options.empty()) return std::nullopt;
  const char last = static_cast<char>('A' + options.size() - 1);
  auto word_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  for (std::size_t i = 0; i < response.size(); ++i) {
    const char c = response[i];
    if (c < 'A' || c > last) continue;
    const bool left = i == 0 || !word_char(response[i - 1]);
    const bool right = i + 1 == response.size() || !word_char(response[i + 1]);
    if (left && right) return c;
  }
  std::optional<char> best;
  std::size_t best_len = 0;
  for (std::size_t k = 0; k < options.size(); ++k) {
    const auto& o = options[k];
    if (!o.empty() && o.size() > best_len && response.find(o) != std::string_view::npos) {
      best = static_cast<char>('A' + k);
      best_len = o.size();
    }
  }
  return best;
}

}  // namespace symguide::eval
