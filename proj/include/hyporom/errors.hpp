#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hyporom {

enum class ErrorCode {
  ZeroWaveSpeed,
  NonFiniteState,
  NonPositiveDepth,
  UnsupportedSystem,
  DegenerateWaveFan,
  NonMonotoneTime,
  TooFewSnapshots,
  ShapeMismatch,
  IoError,
  FormatVersionMismatch,
  ChecksumMismatch,
  EmptySlice,
  BreakdownInEigensolve,
  AllZeroSpectrum,
  SingularInterpolationMatrix,
  EvaluationError,
  MissingAuxBasis,
  ConfigError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroWaveSpeed: return "ZeroWaveSpeed";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::UnsupportedSystem: return "UnsupportedSystem";
    case ErrorCode::DegenerateWaveFan: return "DegenerateWaveFan";
    case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::TooFewSnapshots: return "TooFewSnapshots";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::EmptySlice: return "EmptySlice";
    case ErrorCode::BreakdownInEigensolve: return "BreakdownInEigensolve";
    case ErrorCode::AllZeroSpectrum: return "AllZeroSpectrum";
    case ErrorCode::SingularInterpolationMatrix: return "SingularInterpolationMatrix";
    case ErrorCode::EvaluationError: return "EvaluationError";
    case ErrorCode::MissingAuxBasis: return "MissingAuxBasis";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this type; `code()` is
/// what callers branch on, `what()` carries the human-readable context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// True for the codes that mean "the numbers went bad" rather than
  /// "the input was malformed".
  bool is_numerical() const noexcept {
    switch (code_) {
      case ErrorCode::ZeroWaveSpeed:
      case ErrorCode::NonFiniteState:
      case ErrorCode::NonPositiveDepth:
      case ErrorCode::DegenerateWaveFan:
      case ErrorCode::BreakdownInEigensolve:
      case ErrorCode::AllZeroSpectrum:
      case ErrorCode::SingularInterpolationMatrix:
      case ErrorCode::EvaluationError:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

/// Re-throws `e` with a prefix naming where it happened (time, stage, window).
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
  throw Error(e.code(), context + ": " + e.detail());
}

}  // namespace hyporom
