#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace symguide::eval {

// Option letter picked by a free-text reply, or nullopt when none can be
// identified (scored as wrong). First a standalone capital letter within the
// option range, scanning left to right; failing that, the option whose full
// text appears verbatim in the reply, preferring the longest such option.
std::optional<char> extract_choice(std::string_view response,
                                   const std::vector<std::string>& options);

}  // namespace symguide::eval
