#include "monoflow/errors.hpp"

namespace monoflow {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InfeasibleSet: return "InfeasibleSet";
    case ErrorCode::PointNotInSet: return "PointNotInSet";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::UnsupportedVariant: return "UnsupportedVariant";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::IterationCap: return "IterationCap";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::NotConvex: return "NotConvex";
    case ErrorCode::UnboundedBelow: return "UnboundedBelow";
    case ErrorCode::NotNonnegative: return "NotNonnegative";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::NotInterior: return "NotInterior";
    case ErrorCode::EmptySampleSet: return "EmptySampleSet";
    case ErrorCode::BallNotInterior: return "BallNotInterior";
    case ErrorCode::ZeroCoefficient: return "ZeroCoefficient";
    case ErrorCode::SetupViolation: return "SetupViolation";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::NotRepresentable: return "NotRepresentable";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace monoflow
