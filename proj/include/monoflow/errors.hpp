#pragma once

#include <stdexcept>
#include <string>

namespace monoflow {

enum class ErrorCode {
  DimensionMismatch,
  InfeasibleSet,
  PointNotInSet,
  Unbounded,
  UnsupportedVariant,
  NonConvergence,
  IterationCap,
  OutsideDomain,
  SolverFailure,
  NotConvex,
  UnboundedBelow,
  NotNonnegative,
  DomainViolation,
  NotInterior,
  EmptySampleSet,
  BallNotInterior,
  ZeroCoefficient,
  SetupViolation,
  NoSolution,
  NotRepresentable,
  SchemaError,
  IoError,
};

const char* to_string(ErrorCode code);

// Single exception type for the whole library; the code is what CLI exit
// status and tests dispatch on, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace monoflow
