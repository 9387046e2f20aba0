#pragma once

#include <stdexcept>
#include <string>

namespace effham {

/// Machine-readable failure categories surfaced by the library and the CLI.
enum class ErrorCode {
  DimensionMismatch,
  BadLength,
  NotHermitian,
  NotAState,
  NonDiagonalizable,
  NoConvergence,
  DependentBasis,
  NotHermitianSymmetric,
  DegenerateTrack,
  AllDegenerate,
  ZeroOverlap,
  StepTooCoarse,
  EmptyGrid,
  BadConfig,
  IoError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotAState: return "NotAState";
    case ErrorCode::NonDiagonalizable: return "NonDiagonalizable";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DependentBasis: return "DependentBasis";
    case ErrorCode::NotHermitianSymmetric: return "NotHermitianSymmetric";
    case ErrorCode::DegenerateTrack: return "DegenerateTrack";
    case ErrorCode::AllDegenerate: return "AllDegenerate";
    case ErrorCode::ZeroOverlap: return "ZeroOverlap";
    case ErrorCode::StepTooCoarse: return "StepTooCoarse";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Domain error with a stable code and, where it helps, the offending field.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string field = {})
      : std::runtime_error(std::move(message)), code_(code), field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace effham
