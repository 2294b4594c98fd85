#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affdim {

enum class ErrorCode {
  SingularMatrix,
  EqualSingularValues,
  IndexOutOfRange,
  BudgetExceeded,
  DegenerateSystem,
  InvalidProbabilityVector,
  InvalidExponents,
  WindowTooWide,
  EmptyMeasure,
  BiasRuleViolated,
  DegenerateCloud,
  NotTriangular,
  InvalidEccentricity,
  PreconditionViolated,
  EmptyFiber,
  ParseError,
  ValidationError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::EqualSingularValues: return "EqualSingularValues";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::DegenerateSystem: return "DegenerateSystem";
    case ErrorCode::InvalidProbabilityVector: return "InvalidProbabilityVector";
    case ErrorCode::InvalidExponents: return "InvalidExponents";
    case ErrorCode::WindowTooWide: return "WindowTooWide";
    case ErrorCode::EmptyMeasure: return "EmptyMeasure";
    case ErrorCode::BiasRuleViolated: return "BiasRuleViolated";
    case ErrorCode::DegenerateCloud: return "DegenerateCloud";
    case ErrorCode::NotTriangular: return "NotTriangular";
    case ErrorCode::InvalidEccentricity: return "InvalidEccentricity";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::EmptyFiber: return "EmptyFiber";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to a structured error document.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace affdim
