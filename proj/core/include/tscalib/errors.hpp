#ifndef TSCALIB_ERRORS_HPP
#define TSCALIB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tscalib {

enum class ErrorCode {
  OutOfRange,
  InsufficientSamples,
  IntervalMismatch,
  EmptyCloud,
  EmptyImage,
  BadThresholds,
  PoseMissing,
  RegistrationDiverged,
  DegenerateTarget,
  NoCorrespondences,
  NoFeatures,
  WindowMismatch,
  DegenerateConfig,
  MalformedFile,
  IoError,
  MissingKey,
  ParseError,
  TimestampMismatch,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::IntervalMismatch: return "IntervalMismatch";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::BadThresholds: return "BadThresholds";
    case ErrorCode::PoseMissing: return "PoseMissing";
    case ErrorCode::RegistrationDiverged: return "RegistrationDiverged";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::NoCorrespondences: return "NoCorrespondences";
    case ErrorCode::NoFeatures: return "NoFeatures";
    case ErrorCode::WindowMismatch: return "WindowMismatch";
    case ErrorCode::DegenerateConfig: return "DegenerateConfig";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TimestampMismatch: return "TimestampMismatch";
  }
  return "Unknown";
}

/// All recoverable toolkit failures carry a code from the list above so
/// callers can branch without string matching.
class CalibError : public std::runtime_error {
 public:
  CalibError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tscalib

#endif  // TSCALIB_ERRORS_HPP
