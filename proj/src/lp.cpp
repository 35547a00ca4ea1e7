#include "monoflow/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "monoflow/errors.hpp"

namespace monoflow {

namespace {

constexpr double kPivotEps = 1e-10;
constexpr double kCostEps = 1e-9;
constexpr int kMaxPivots = 20000;

// Full-tableau simplex with Bland's rule (finite, deterministic).
// T = B^{-1}[A | b]; basis holds the basic column of each row.
struct Tableau {
  Matrix T;                // m x (n+1), last column is rhs
  std::vector<int> basis;  // size m
  int m, n;

  double rhs(int i) const { return T(i, n); }

  // one simplex phase on costs c (size n); returns false on unbounded
  bool run(const Vector& c) {
    for (int iter = 0; iter < kMaxPivots; ++iter) {
      // reduced costs r_j = c_j - c_B' T_j
      Vector cb(m);
      for (int i = 0; i < m; ++i) cb(i) = c(basis[i]);
      int enter = -1;
      for (int j = 0; j < n; ++j) {
        double rj = c(j) - cb.dot(T.col(j));
        if (rj < -kCostEps) {
          enter = j;  // Bland: first improving index
          break;
        }
      }
      if (enter < 0) return true;  // optimal
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        double tij = T(i, enter);
        if (tij > kPivotEps) {
          double ratio = rhs(i) / tij;
          if (ratio < best - kPivotEps ||
              (ratio < best + kPivotEps &&
               (leave < 0 || basis[i] < basis[leave]))) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded direction
      pivot(leave, enter);
    }
    fail(ErrorCode::SolverFailure, "simplex exceeded pivot cap");
  }

  void pivot(int row, int col) {
    T.row(row) /= T(row, col);
    for (int i = 0; i < m; ++i) {
      if (i != row && std::abs(T(i, col)) > 0.0) {
        T.row(i) -= T(i, col) * T.row(row);
      }
    }
    basis[row] = col;
  }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  const int n = static_cast<int>(lp.c.size());
  const int mu = static_cast<int>(lp.b_ub.size());
  const int me = static_cast<int>(lp.b_eq.size());
  const int m = mu + me;

  // standard form: x = u - v, slacks on <= rows, rhs sign-normalized
  const int ns = 2 * n + mu;
  Matrix A = Matrix::Zero(m, ns);
  Vector b(m);
  for (int i = 0; i < mu; ++i) {
    A.block(i, 0, 1, n) = lp.A_ub.row(i);
    A.block(i, n, 1, n) = -lp.A_ub.row(i);
    A(i, 2 * n + i) = 1.0;
    b(i) = lp.b_ub(i);
  }
  for (int i = 0; i < me; ++i) {
    A.block(mu + i, 0, 1, n) = lp.A_eq.row(i);
    A.block(mu + i, n, 1, n) = -lp.A_eq.row(i);
    b(mu + i) = lp.b_eq(i);
  }
  // row scaling for conditioning
  for (int i = 0; i < m; ++i) {
    double s = A.row(i).cwiseAbs().maxCoeff();
    if (s > 0) {
      A.row(i) /= s;
      b(i) /= s;
    }
  }
  for (int i = 0; i < m; ++i) {
    if (b(i) < 0) {
      A.row(i) = -A.row(i);
      b(i) = -b(i);
    }
  }

  // phase 1 with artificials on every row
  Tableau tab;
  tab.m = m;
  tab.n = ns + m;
  tab.T = Matrix::Zero(m, tab.n + 1);
  tab.T.block(0, 0, m, ns) = A;
  tab.T.block(0, ns, m, m) = Matrix::Identity(m, m);
  tab.T.col(tab.n) = b;
  tab.basis.resize(m);
  for (int i = 0; i < m; ++i) tab.basis[i] = ns + i;

  Vector c1 = Vector::Zero(tab.n);
  c1.tail(m).setOnes();
  if (m > 0) {
    tab.run(c1);  // phase-1 objective is bounded below by zero
    double art = 0;
    for (int i = 0; i < m; ++i)
      if (tab.basis[i] >= ns) art += tab.rhs(i);
    if (art > 1e-7) return {LpStatus::Infeasible, 0.0, Vector()};
    // drive artificials out of the basis; all-zero rows are redundant
    for (int i = 0; i < m; ++i) {
      if (tab.basis[i] >= ns) {
        int col = -1;
        for (int j = 0; j < ns; ++j) {
          if (std::abs(tab.T(i, j)) > 1e-8) {
            col = j;
            break;
          }
        }
        if (col >= 0) tab.pivot(i, col);
      }
    }
  }

  Vector c2 = Vector::Zero(tab.n);
  c2.head(n) = lp.c;
  c2.segment(n, n) = -lp.c;
  // zero out artificial columns so they never price back in; a basic
  // artificial that could not be driven out sits on a redundant zero row
  tab.T.block(0, ns, m, m).setZero();
  for (int i = 0; i < m; ++i) {
    if (tab.basis[i] >= ns) tab.T(i, tab.basis[i]) = 1.0;
  }

  if (!tab.run(c2)) return {LpStatus::Unbounded, 0.0, Vector()};

  Vector z = Vector::Zero(tab.n);
  for (int i = 0; i < m; ++i) z(tab.basis[i]) = tab.rhs(i);
  Vector x = z.head(n) - z.segment(n, n);
  return {LpStatus::Optimal, lp.c.dot(x), x};
}

LpSolution solve_lp_lexico(const LinearProgram& lp) {
  LpSolution base = solve_lp(lp);
  if (base.status != LpStatus::Optimal) return base;
  const int n = static_cast<int>(lp.c.size());

  // pin the objective, then minimize coordinates in order
  LinearProgram cur = lp;
  const int me0 = static_cast<int>(lp.b_eq.size());
  Matrix Aeq(me0 + 1 + n, n);
  Vector beq(me0 + 1 + n);
  int rows = 0;
  if (me0 > 0) {
    Aeq.topRows(me0) = lp.A_eq;
    beq.head(me0) = lp.b_eq;
  }
  rows = me0;
  Aeq.row(rows) = lp.c.transpose();
  beq(rows) = base.value;
  ++rows;

  Vector best = base.x;
  for (int i = 0; i < n; ++i) {
    cur.c = Vector::Zero(n);
    cur.c(i) = 1.0;
    cur.A_eq = Aeq.topRows(rows);
    cur.b_eq = beq.head(rows);
    LpSolution s = solve_lp(cur);
    double xi = (s.status == LpStatus::Optimal) ? s.x(i) : best(i);
    if (s.status == LpStatus::Optimal) best = s.x;
    Aeq.row(rows).setZero();
    Aeq(rows, i) = 1.0;
    beq(rows) = xi;
    ++rows;
  }
  return {LpStatus::Optimal, lp.c.dot(best), best};
}

}  // namespace monoflow
