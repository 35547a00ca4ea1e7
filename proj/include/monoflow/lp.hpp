#pragma once

#include <Eigen/Core>

namespace monoflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class LpStatus { Optimal, Unbounded, Infeasible };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Vector x;
};

// min c'x  s.t.  A_ub x <= b_ub,  A_eq x == b_eq, x free.
// Zero-row matrices are allowed for either block.
struct LinearProgram {
  Vector c;
  Matrix A_ub;
  Vector b_ub;
  Matrix A_eq;
  Vector b_eq;
};

LpSolution solve_lp(const LinearProgram& lp);

// Same problem, but among all optimizers returns the lexicographically
// smallest one (coordinate by coordinate).  Falls back to the plain
// deterministic optimizer coordinate when the optimal face is unbounded
// below in that coordinate.
LpSolution solve_lp_lexico(const LinearProgram& lp);

}  // namespace monoflow
