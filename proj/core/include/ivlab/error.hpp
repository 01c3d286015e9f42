#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ivlab {

enum class ErrorCode {
  Schema,
  Conflict,
  Lookup,
  EmptyOverlap,
  ZeroVariance,
  InsufficientData,
  Collinearity,
  DivisionHazard,
  ZeroCompliance,
  Domain,
  Stability,
  Transport,
  Parse,
  State,
  Capability,
  TranscriptMismatch,
  Exhaustion,
  DegenerateBaseline,
  InsufficientInstruments,
  Config,
  Usage,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `code()` identifies the failure class;
/// `what()` carries a human-readable message prefixed with the code name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Schema: return "schema error";
    case ErrorCode::Conflict: return "conflict error";
    case ErrorCode::Lookup: return "lookup error";
    case ErrorCode::EmptyOverlap: return "empty-overlap error";
    case ErrorCode::ZeroVariance: return "zero-variance error";
    case ErrorCode::InsufficientData: return "insufficient-data error";
    case ErrorCode::Collinearity: return "collinearity error";
    case ErrorCode::DivisionHazard: return "division-hazard error";
    case ErrorCode::ZeroCompliance: return "zero-compliance error";
    case ErrorCode::Domain: return "domain error";
    case ErrorCode::Stability: return "stability error";
    case ErrorCode::Transport: return "transport error";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::State: return "state error";
    case ErrorCode::Capability: return "capability error";
    case ErrorCode::TranscriptMismatch: return "transcript-mismatch error";
    case ErrorCode::Exhaustion: return "exhaustion error";
    case ErrorCode::DegenerateBaseline: return "degenerate-baseline error";
    case ErrorCode::InsufficientInstruments: return "insufficient-instruments error";
    case ErrorCode::Config: return "config error";
    case ErrorCode::Usage: return "usage error";
    case ErrorCode::Io: return "io error";
  }
  return "error";
}

}  // namespace ivlab
