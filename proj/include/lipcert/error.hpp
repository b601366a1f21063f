#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lipcert {

enum class ErrorCode {
  ZeroMatrix,
  NotPreScaled,
  OddWidth,
  ShapeMismatch,
  BadClassIndex,
  UnconstrainedNet,
  NotArgmax,
  NoBracket,
  UnsupportedWeights,
  InvalidDistribution,
  InvalidBoundary,
  Unsatisfiable,
  NonFiniteLoss,
  InvalidArgument,
  ConfigInvalid,
  OutputUnwritable,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::NotPreScaled: return "NotPreScaled";
    case ErrorCode::OddWidth: return "OddWidth";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BadClassIndex: return "BadClassIndex";
    case ErrorCode::UnconstrainedNet: return "UnconstrainedNet";
    case ErrorCode::NotArgmax: return "NotArgmax";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::UnsupportedWeights: return "UnsupportedWeights";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidBoundary: return "InvalidBoundary";
    case ErrorCode::Unsatisfiable: return "Unsatisfiable";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::OutputUnwritable: return "OutputUnwritable";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-status mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the training loop; remembers which epoch produced the bad loss.
class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(std::size_t epoch, const std::string& what)
      : Error(ErrorCode::NonFiniteLoss, what), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace lipcert
