#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace embedfit {

enum class ErrorCode {
  ZeroVector,
  DimensionMismatch,
  EmptySet,
  NonFinite,
  DuplicateName,
  TooFewPoints,
  DegenerateSet,
  InvalidSplit,
  InsufficientLabels,
  ZeroProjection,
  EmptyCandidates,
  EmptyExemplars,
  UnresolvedName,
  InsufficientCandidates,
  InvalidTemplate,
  OutOfRange,
  SplitInfeasible,
  DuplicateClass,
  UnknownLabel,
  GalleryTooSmall,
  BadMagic,
  BadVersion,
  Truncated,
  NonUtf8Name,
  InvalidConfig,
  NotFound,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace embedfit
