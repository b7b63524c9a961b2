#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "symguide/common/errors.hpp"
#include "symguide/symbols/types.hpp"

namespace symguide::symbols {

enum class ViolationCode {
  MissingField,
  UnexpectedField,
  CoordinateOutOfBounds,
  DegenerateArrow,
  FrameIndexMismatch,
  NegativeFrameIndex,
  DuplicateStateSymbol,
  DuplicateAxisColor,
};

enum class Severity { Error, Warning };

struct Violation {
  ViolationCode code;
  Severity severity = Severity::Error;
  std::optional<std::size_t> symbol_index;  // absent for set-level issues
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

std::string_view to_token(ViolationCode code);

struct FrameDims {
  int width = 0;
  int height = 0;
};

// Checks every instance- and set-level invariant. Bounds are only checked
// when `dims` is supplied. Warnings (e.g. repeated axis colors) are reported
// but do not make a set invalid.
std::vector<Violation> validate_symbols(const SymbolSet& set,
                                        std::optional<FrameDims> dims);

// Same as above with mandatory frame dimensions.
std::vector<Violation> validate_symbols(const SymbolSet& set, int frame_width,
                                        int frame_height);

bool has_errors(const std::vector<Violation>& violations);

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  std::string_view kind() const noexcept override { return "ValidationError"; }
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// Throws ValidationError when any error-level violation is present.
void require_valid(const SymbolSet& set, std::optional<FrameDims> dims);

}  // namespace symguide::symbols
