#include "setfix/error.hpp"

namespace setfix {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::ParameterRange: return "ParameterRange";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::InvalidOperator: return "InvalidOperator";
    case ErrorCode::AxiomViolation: return "AxiomViolation";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateDomain: return "DegenerateDomain";
    case ErrorCode::StrictFixedPointMismatch: return "StrictFixedPointMismatch";
    case ErrorCode::NoStrictFixedPoint: return "NoStrictFixedPoint";
    case ErrorCode::HypothesisFailed: return "HypothesisFailed";
    case ErrorCode::NoApproximateSolutions: return "NoApproximateSolutions";
    case ErrorCode::ConstructionFailed: return "ConstructionFailed";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace setfix
