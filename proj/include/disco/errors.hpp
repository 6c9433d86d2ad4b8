#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace disco {

enum class ErrorCode {
  MalformedLine,
  NonNumericIndex,
  NonMonotoneEduIndex,
  MalformedBracketLine,
  InconsistentSpan,
  LengthMismatch,
  MalformedRecord,
  SpanOutOfRange,
  InconsistentTree,
  IndexOutOfRange,
  InvalidN,
  EmptySample,
  EmptyReference,
  TooLargeForExhaustive,
  MissingReference,
  ShapeMismatch,
  NonFiniteGradient,
  GraphSizeMismatch,
  EmptyCorpus,
  NonFiniteLoss,
  VersionMismatch,
  InvalidConfig,
  Io,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries a code, and parser failures
// carry the 1-based line number of the offending input line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace disco
