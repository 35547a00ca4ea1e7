#include "monoflow/lcs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

namespace monoflow {

namespace {

constexpr int kPgsSweepCap = 50000;
constexpr int kLemkePivotCap = 10000;
constexpr double kResTol = 1e-10;

double comp_tolerance(const Vector& q) { return kResTol * (1.0 + q.norm()); }

void require_psd(const Matrix& M, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()),
                                           Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -1e-10, ErrorCode::NotConvex,
          std::string(what) + " is not positive semidefinite");
}

bool certified(const Vector& u, const Vector& w, const Vector& q) {
  return u.minCoeff() >= -kResTol && w.minCoeff() >= -kResTol &&
         std::abs(u.dot(w)) <= comp_tolerance(q);
}

// complementary pivoting on the tableau [w | u | z0 | rhs]; the w-block is
// the basis inverse, which the lexicographic ratio test reads directly
bool lemke(const Matrix& M, const Vector& q, Vector& u) {
  const auto m = q.size();
  Matrix T(m, 2 * m + 2);
  T.block(0, 0, m, m) = Matrix::Identity(m, m);
  T.block(0, m, m, m) = -M;
  T.col(2 * m) = -Vector::Ones(m);
  T.col(2 * m + 1) = q;
  // basis entries: 0..m-1 encode w_i, m..2m-1 encode u_i, 2m encodes z0
  std::vector<Eigen::Index> basis(static_cast<size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<size_t>(i)] = i;

  auto lex_less = [&](Eigen::Index a, Eigen::Index b, Eigen::Index col) {
    // compare rows a, b of [rhs | w-block] scaled by the pivot column
    double ra = T(a, 2 * m + 1) / T(a, col);
    double rb = T(b, 2 * m + 1) / T(b, col);
    if (std::abs(ra - rb) > 1e-14 * (1.0 + std::abs(ra))) return ra < rb;
    for (Eigen::Index j = 0; j < m; ++j) {
      ra = T(a, j) / T(a, col);
      rb = T(b, j) / T(b, col);
      if (std::abs(ra - rb) > 1e-14 * (1.0 + std::abs(ra))) return ra < rb;
    }
    return false;
  };

  auto pivot = [&](Eigen::Index r, Eigen::Index col) {
    T.row(r) /= T(r, col);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i == r) continue;
      double factor = T(i, col);
      if (factor != 0.0) T.row(i) -= factor * T.row(r);
    }
    basis[static_cast<size_t>(r)] = col;
  };

  // drive z0 in against the most negative rhs entry
  Eigen::Index r = 0;
  for (Eigen::Index i = 1; i < m; ++i)
    if (T(i, 2 * m + 1) < T(r, 2 * m + 1)) r = i;
  if (T(r, 2 * m + 1) >= 0.0) {
    u = Vector::Zero(m);
    return true;
  }
  Eigen::Index entering = 2 * m;
  pivot(r, entering);
  Eigen::Index complement = r + m;  // w_r left, u_r must enter

  for (int k = 0; k < kLemkePivotCap; ++k) {
    entering = complement;
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (T(i, entering) <= 1e-11) continue;
      if (best < 0 || lex_less(i, best, entering)) best = i;
    }
    if (best < 0) return false;  // ray termination: no complementary pivot
    Eigen::Index leaving = basis[static_cast<size_t>(best)];
    pivot(best, entering);
    if (leaving == 2 * m) {  // z0 left: complementary basis reached
      u = Vector::Zero(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::Index b = basis[static_cast<size_t>(i)];
        if (b >= m && b < 2 * m) u(b - m) = T(i, 2 * m + 1);
      }
      return true;
    }
    complement = leaving < m ? leaving + m : leaving - m;
  }
  fail(ErrorCode::IterationCap, "lemke pivot cap exhausted");
}

}  // namespace

LCSSystem make_lcs(Matrix A_lin, Matrix B, Matrix C, Matrix D, Vector x0) {
  const auto n = A_lin.rows();
  const auto m = C.rows();
  require(A_lin.cols() == n, ErrorCode::DimensionMismatch,
          "lcs: A_lin must be square");
  require(B.rows() == n && B.cols() == m, ErrorCode::DimensionMismatch,
          "lcs: B must be n x m");
  require(C.cols() == n, ErrorCode::DimensionMismatch, "lcs: C must be m x n");
  require(D.rows() == m && D.cols() == m, ErrorCode::DimensionMismatch,
          "lcs: D must be m x m");
  require(x0.size() == n, ErrorCode::DimensionMismatch,
          "lcs: x0 dimension mismatch");
  require(m >= 1, ErrorCode::DimensionMismatch,
          "lcs: at least one complementarity row");
  require_psd(D, "lcs: D + D'");
  return LCSSystem{std::move(A_lin), std::move(B), std::move(C), std::move(D),
                   std::move(x0)};
}

LCPSolution solve_lcp(const Matrix& M, const Vector& q) {
  const auto m = q.size();
  require(M.rows() == m && M.cols() == m, ErrorCode::DimensionMismatch,
          "lcp: matrix/vector dimension mismatch");
  require_psd(M, "lcp: M + M'");

  LCPSolution sol;
  sol.u = Vector::Zero(m);

  if (q.minCoeff() >= 0.0) {
    sol.w = q;
    return sol;  // the trivial branch, exact
  }

  // projected Gauss-Seidel with over-relaxation; zero-diagonal rows are
  // skew-coupled and left to the pivoting fallback
  const double omega = 1.3;
  bool solved = false;
  Vector u = Vector::Zero(m);
  for (int sweep = 1; sweep <= kPgsSweepCap; ++sweep) {
    double delta = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (M(i, i) <= 1e-14) continue;
      double wi = q(i) + M.row(i).dot(u);
      double next = std::max(0.0, u(i) - omega * wi / M(i, i));
      delta = std::max(delta, std::abs(next - u(i)));
      u(i) = next;
    }
    if (sweep % 8 == 0 || delta <= 1e-16) {
      Vector w = q + M * u;
      if (certified(u, w, q)) {
        // polish: the exact solve on the detected active set sharpens the
        // iterate to the complementary-basis solution
        std::vector<Eigen::Index> act;
        for (Eigen::Index i = 0; i < m; ++i)
          if (u(i) > 1e-8) act.push_back(i);
        if (!act.empty()) {
          const auto a = static_cast<Eigen::Index>(act.size());
          Matrix Maa(a, a);
          Vector qa(a);
          for (Eigen::Index r = 0; r < a; ++r) {
            qa(r) = q(act[static_cast<size_t>(r)]);
            for (Eigen::Index c = 0; c < a; ++c)
              Maa(r, c) = M(act[static_cast<size_t>(r)],
                            act[static_cast<size_t>(c)]);
          }
          Eigen::FullPivLU<Matrix> lu(Maa);
          if (lu.isInvertible()) {
            Vector ua = lu.solve(-qa);
            Vector u2 = Vector::Zero(m);
            for (Eigen::Index r = 0; r < a; ++r)
              u2(act[static_cast<size_t>(r)]) = ua(r);
            Vector w2 = q + M * u2;
            if (certified(u2, w2, q)) {
              u = std::move(u2);
              w = std::move(w2);
            }
          }
        }
        sol.u = u;
        sol.w = w;
        sol.sweeps = sweep;
        solved = true;
        break;
      }
      if (delta <= 1e-16) break;  // stalled short of the certificate
    }
  }

  if (!solved) {
    Vector u_piv;
    if (!lemke(M, q, u_piv))
      fail(ErrorCode::NoSolution,
           "lcp ray termination; worst slack " +
               std::to_string((q + M * u).minCoeff()));
    Vector w = q + M * u_piv;
    require(certified(u_piv, w, q), ErrorCode::SolverFailure,
            "lcp pivot solution failed the residual certificate");
    sol.u = std::move(u_piv);
    sol.w = std::move(w);
    sol.sweeps = -1;
  }

  sol.res_u = std::max(0.0, -sol.u.minCoeff());
  sol.res_w = std::max(0.0, -sol.w.minCoeff());
  sol.res_comp = std::abs(sol.u.dot(sol.w));
  return sol;
}

LCSTrajectory simulate_lcs(const LCSSystem& lcs, double T, double h) {
  require(h > 0.0, ErrorCode::SetupViolation, "simulate_lcs: h <= 0");
  require(T >= 0.0, ErrorCode::SetupViolation, "simulate_lcs: T < 0");
  const auto m = lcs.C.rows();
  const bool velocity_form =
      lcs.D.norm() <= 1e-14 &&
      (lcs.B - lcs.C.transpose()).norm() <= 1e-12;
  Matrix Mv;
  if (velocity_form) Mv = lcs.C * lcs.C.transpose();

  const int N = static_cast<int>(std::ceil(T / h - 1e-9));
  LCSTrajectory traj;
  traj.times.reserve(static_cast<size_t>(N) + 1);
  traj.states.reserve(static_cast<size_t>(N) + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(lcs.x0);

  Vector x = lcs.x0;
  for (int k = 0; k < N; ++k) {
    LCPSolution step;
    try {
      if (velocity_form) {
        // nu = h u resolves 0 <= nu perp C x_{k+1} >= 0; the x-update below
        // is then exactly the projection step of the bridged inclusion
        step = solve_lcp(Mv, lcs.C * (x + h * (lcs.A_lin * x)));
      } else {
        step = solve_lcp(lcs.D, lcs.C * x);
      }
    } catch (const Error& e) {
      fail(e.code(),
           std::string(e.what()) + " at step " + std::to_string(k));
    }
    Vector u = velocity_form ? Vector(step.u / h) : step.u;
    x = velocity_form
            ? Vector(x + h * (lcs.A_lin * x) + lcs.B * step.u)
            : Vector(x + h * (lcs.A_lin * x + lcs.B * u));
    traj.times.push_back(h * (k + 1));
    traj.states.push_back(x);
    traj.multipliers.push_back(std::move(u));
    traj.comp_residuals.push_back(step.res_comp);
  }
  (void)m;
  return traj;
}

void write_lcs_csv(const LCSTrajectory& traj, std::ostream& out) {
  const auto n = traj.states.empty() ? 0 : traj.states.front().size();
  const auto m =
      traj.multipliers.empty() ? 0 : traj.multipliers.front().size();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= m; ++i) out << ",u_" << i;
  out << ",comp_residual\n";
  char buf[32];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << sep;
  };
  for (size_t k = 0; k < traj.states.size(); ++k) {
    put(traj.times[k], ',');
    for (Eigen::Index i = 0; i < n; ++i) put(traj.states[k](i), ',');
    for (Eigen::Index i = 0; i < m; ++i)
      put(k == 0 ? 0.0 : traj.multipliers[k - 1](i), ',');
    double res = k == 0 ? 0.0 : traj.comp_residuals[k - 1];
    std::snprintf(buf, sizeof buf, "%.17g", res);
    out << buf << '\n';
  }
}

SystemSpec lcs_to_inclusion(const LCSSystem& lcs) {
  require(lcs.D.norm() <= 1e-14, ErrorCode::NotRepresentable,
          "bridge needs D = 0");
  require((lcs.B - lcs.C.transpose()).norm() <= 1e-12,
          ErrorCode::NotRepresentable, "bridge needs B = C'");
  ConvexSet K =
      ConvexSet::polyhedron(-lcs.C, Vector::Zero(lcs.C.rows()));
  return make_system(MonotoneOperator::normal_cone_of(std::move(K)),
                     Drift::affine(lcs.A_lin,
                                   Vector::Zero(lcs.A_lin.rows())));
}

}  // namespace monoflow
