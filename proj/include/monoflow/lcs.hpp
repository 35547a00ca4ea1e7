#pragma once

#include <iosfwd>
#include <vector>

#include "monoflow/integrator.hpp"

namespace monoflow {

// linear complementarity system
//   xdot = A_lin x + B u,   0 <= u  perp  C x + D u >= 0
struct LCSSystem {
  Matrix A_lin;  // n x n
  Matrix B;      // n x m
  Matrix C;      // m x n
  Matrix D;      // m x m, D + D' PSD
  Vector x0;
};

// validates dimensions and the PSD invariant of D + D'
LCSSystem make_lcs(Matrix A_lin, Matrix B, Matrix C, Matrix D, Vector x0);

struct LCPSolution {
  Vector u;
  Vector w;               // q + M u
  double res_u = 0.0;     // worst negative part of u
  double res_w = 0.0;     // worst negative part of w
  double res_comp = 0.0;  // |u'w|
  int sweeps = 0;         // Gauss-Seidel sweeps; -1 marks the pivot fallback
};

// projected Gauss-Seidel with over-relaxation, Lemke pivoting with the
// lexicographic rule as fallback.  The returned solution carries the
// residual certificate u >= -1e-10, w >= -1e-10, |u'w| <= 1e-10 (1+||q||).
LCPSolution solve_lcp(const Matrix& M, const Vector& q);

// x-block trajectory plus the per-step multiplier records; multipliers and
// complementarity residuals are indexed by step (length N for N+1 states)
struct LCSTrajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> multipliers;
  std::vector<double> comp_residuals;
};

// explicit Euler on x with the multiplier resolved per step.  A vanishing D
// with B = C' is stepped through the velocity-level complementarity problem
// in nu = h u, which is the projection step of the matching inclusion.
LCSTrajectory simulate_lcs(const LCSSystem& lcs, double T, double h);

// csv layout "t,x_1..x_n,u_1..u_m,comp_residual", one row per state
void write_lcs_csv(const LCSTrajectory& traj, std::ostream& out);

// restricted bridge: D = 0 and B = C' turn the LCS into the inclusion
// xdot in A_lin x - N_K(x) with K = {x : Cx >= 0}
SystemSpec lcs_to_inclusion(const LCSSystem& lcs);

}  // namespace monoflow
