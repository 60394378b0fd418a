#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace setfix {

enum class ErrorCode {
  EmptySet,
  InvalidInterval,
  ParameterRange,
  OutOfDomain,
  InvalidOperator,
  AxiomViolation,
  InsufficientData,
  DegenerateDomain,
  StrictFixedPointMismatch,
  NoStrictFixedPoint,
  HypothesisFailed,
  NoApproximateSolutions,
  ConstructionFailed,
  SchemaError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above; the
/// message holds the context (offending value, step, grid point).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace setfix
