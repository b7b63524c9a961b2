#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace symguide {

// Root of every exception thrown by the library. `kind()` is the stable
// machine-readable name used in logs and API error bodies.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual std::string_view kind() const noexcept = 0;
};

template <class Tag>
class TaggedError : public Error {
 public:
  explicit TaggedError(const std::string& message) : Error(message) {}
  std::string_view kind() const noexcept override { return Tag::name; }
};

#define SYMGUIDE_DEFINE_ERROR(Name, Label)                     \
  struct Name##Tag {                                           \
    static constexpr std::string_view name = Label;            \
  };                                                           \
  using Name = TaggedError<Name##Tag>

SYMGUIDE_DEFINE_ERROR(SemanticError, "SemanticError");
SYMGUIDE_DEFINE_ERROR(ImageFormatError, "ImageFormatError");
SYMGUIDE_DEFINE_ERROR(EmptySetError, "EmptySetError");
SYMGUIDE_DEFINE_ERROR(NoTargetError, "NoTargetError");
SYMGUIDE_DEFINE_ERROR(DuplicateIdError, "DuplicateIdError");
SYMGUIDE_DEFINE_ERROR(MediaDecodeError, "MediaDecodeError");
SYMGUIDE_DEFINE_ERROR(NotFoundError, "NotFoundError");
SYMGUIDE_DEFINE_ERROR(TimestampOutOfRange, "TimestampOutOfRange");
SYMGUIDE_DEFINE_ERROR(InvalidArgument, "InvalidArgument");
SYMGUIDE_DEFINE_ERROR(IoError, "IoError");
SYMGUIDE_DEFINE_ERROR(EndpointError, "EndpointError");
SYMGUIDE_DEFINE_ERROR(ResponseParseError, "ResponseParseError");
SYMGUIDE_DEFINE_ERROR(DimensionMismatch, "DimensionMismatch");
SYMGUIDE_DEFINE_ERROR(AdapterError, "AdapterError");
SYMGUIDE_DEFINE_ERROR(SubtaskIndexOutOfRange, "SubtaskIndexOutOfRange");
SYMGUIDE_DEFINE_ERROR(KeyframeNotInSampleList, "KeyframeNotInSampleList");
SYMGUIDE_DEFINE_ERROR(SuccessContradiction, "SuccessContradiction");
SYMGUIDE_DEFINE_ERROR(MissingSubtaskPlan, "MissingSubtaskPlan");
SYMGUIDE_DEFINE_ERROR(FrameMismatch, "FrameMismatch");
SYMGUIDE_DEFINE_ERROR(ArmMismatch, "ArmMismatch");
SYMGUIDE_DEFINE_ERROR(StageOrderError, "StageOrderError");
SYMGUIDE_DEFINE_ERROR(IncompleteAnnotation, "IncompleteAnnotation");
SYMGUIDE_DEFINE_ERROR(ImmutableError, "ImmutableError");
SYMGUIDE_DEFINE_ERROR(LeaseConflict, "LeaseConflict");
SYMGUIDE_DEFINE_ERROR(InsufficientPool, "InsufficientPool");
SYMGUIDE_DEFINE_ERROR(NotAFailure, "NotAFailure");
SYMGUIDE_DEFINE_ERROR(MissingSymbols, "MissingSymbols");
SYMGUIDE_DEFINE_ERROR(SpecInfeasible, "SpecInfeasible");
SYMGUIDE_DEFINE_ERROR(JudgeParseError, "JudgeParseError");
SYMGUIDE_DEFINE_ERROR(EmptyResults, "EmptyResults");

// Carries the 1-based line number of the offending input line.
class SyntaxError : public Error {
 public:
  SyntaxError(int line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::string_view kind() const noexcept override { return "SyntaxError"; }
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace symguide
