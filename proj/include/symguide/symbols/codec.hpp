#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "symguide/symbols/types.hpp"
#include "symguide/symbols/validate.hpp"

namespace symguide::symbols {

// Symbol code: a header line followed by one symbol per line.
//
//   frame=12 purpose=correction
//   straight_arrow(arm=left, color=green, start=(410,300), end=(470,300), mag=significant)
//   crosshair(arm=none, start=(321,144))
//
// Canonical field order is arm, color, rotation, state, start, end, mag.
// The parser accepts any field order, optional whitespace around tokens,
// blank lines and a missing `arm` (read as none); the emitter always writes
// the canonical form, so parse(emit(s)) == s and emit(parse(t)) == t for any
// canonical t.

// Throws SyntaxError on malformed input and SemanticError when a field rule
// (or, with dims, a bounds rule) is violated.
SymbolSet parse_symbol_code(std::string_view code,
                            std::optional<FrameDims> dims = std::nullopt);

// Throws ValidationError if the set has error-level violations.
std::string emit_symbol_code(const SymbolSet& set);

std::string emit_symbol_line(const SymbolInstance& symbol);

// Pulls a symbol-code block out of free-form model output: a fenced block
// (```symbols or plain ```) starting with a `frame=` header wins, otherwise
// the first `frame=` line and the symbol lines directly after it.
std::optional<std::string> extract_symbol_code(std::string_view text);

}  // namespace symguide::symbols
