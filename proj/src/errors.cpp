#include "disco/errors.hpp"

namespace disco {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::NonNumericIndex: return "NonNumericIndex";
    case ErrorCode::NonMonotoneEduIndex: return "NonMonotoneEduIndex";
    case ErrorCode::MalformedBracketLine: return "MalformedBracketLine";
    case ErrorCode::InconsistentSpan: return "InconsistentSpan";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::SpanOutOfRange: return "SpanOutOfRange";
    case ErrorCode::InconsistentTree: return "InconsistentTree";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidN: return "InvalidN";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::TooLargeForExhaustive: return "TooLargeForExhaustive";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::GraphSizeMismatch: return "GraphSizeMismatch";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           std::optional<std::size_t> line) {
  std::string out(error_code_name(code));
  if (line) out += " at line " + std::to_string(*line);
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(format_message(code, message, line)),
      code_(code),
      line_(line) {}

}  // namespace disco
