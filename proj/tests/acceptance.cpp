// Acceptance suite: thirteen desk-scale criteria, one printed verdict line
// each.  Every tolerance is pinned here, next to the check that uses it.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "doctest.h"
#include "monoflow/config.hpp"
#include "monoflow/sampling.hpp"
#include "oracles.hpp"

using namespace monoflow;

namespace {

void line(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("criterion %02d  %-44s %s  %s\n", id, name,
              ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Vector v1(double a) { return Vector::Constant(1, a); }
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

ConvexSet half_line() {
  return ConvexSet::polyhedron(Matrix::Constant(1, 1, -1.0), Vector::Zero(1));
}

SystemSpec half_line_decay() {
  return make_system(MonotoneOperator::normal_cone_of(half_line()),
                     Drift::affine(Matrix::Constant(1, 1, -1.0),
                                   Vector::Zero(1)));
}

LyapunovCandidate exact_pair() {
  return make_candidate(
      FunctionSpec::quadratic(Matrix::Identity(1, 1), Vector::Zero(1)),
      FunctionSpec::quadratic(2.0 * Matrix::Identity(1, 1), Vector::Zero(1)),
      0.0);
}

// shared scenario catalog: system, pair, and an interior sampling window
struct Scenario {
  const char* name;
  SystemSpec sys;
  LyapunovCandidate cand;
  ConvexSet region;
  Vector x0;
};

std::vector<Scenario> catalog() {
  std::vector<Scenario> list;
  auto sq = [](Eigen::Index n) {
    return FunctionSpec::quadratic(Matrix::Identity(n, n), Vector::Zero(n));
  };
  auto wsq = [](Eigen::Index n) {
    return FunctionSpec::quadratic(2.0 * Matrix::Identity(n, n),
                                   Vector::Zero(n));
  };

  list.push_back({"free-decay",
                  make_system(MonotoneOperator::zero(1),
                              Drift::affine(Matrix::Constant(1, 1, -1.0),
                                            Vector::Zero(1))),
                  make_candidate(sq(1), wsq(1), 0.0),
                  ConvexSet::box(v1(0.125), v1(1.0)), v1(1.0)});

  list.push_back({"half-line", half_line_decay(),
                  make_candidate(sq(1), wsq(1), 0.0),
                  ConvexSet::box(v1(0.125), v1(1.0)), v1(1.0)});

  // drift equilibrium off-center: margins change sign inside the window
  list.push_back(
      {"box-constrained",
       make_system(MonotoneOperator::normal_cone_of(
                       ConvexSet::box(v2(-1.0, -1.0), v2(1.0, 1.0))),
                   Drift::affine(-Matrix::Identity(2, 2), v2(0.3, -0.2))),
       make_candidate(sq(2), FunctionSpec::zero(2), 0.0),
       ConvexSet::box(v2(-0.5, -0.5), v2(0.5, 0.5)), v2(0.8, 0.6)});

  LCSSystem lcs = make_lcs(-Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                           Matrix::Identity(2, 2), Matrix::Zero(2, 2),
                           v2(1.0, 0.5));
  list.push_back({"lcs-bridged", lcs_to_inclusion(lcs),
                  make_candidate(sq(2), wsq(2), 0.0),
                  ConvexSet::box(v2(0.125, 0.125), v2(1.0, 1.0)),
                  v2(1.0, 0.5)});

  Matrix rot(2, 2);
  rot << 1.0, 0.5, -0.5, 1.0;  // monotone, not symmetric
  list.push_back({"saturated-drift",
                  make_system(MonotoneOperator::linear(rot),
                              Drift::saturated(-Matrix::Identity(2, 2),
                                               Vector::Zero(2), 0.75)),
                  make_candidate(sq(2), FunctionSpec::zero(2), 0.0),
                  ConvexSet::box(v2(-0.6, -0.6), v2(0.6, 0.6)),
                  v2(0.5, -0.4)});

  list.push_back(
      {"l1-subdifferential",
       make_system(MonotoneOperator::subdiff_of(
                       FunctionSpec::scaled_norm(1.0, 1, Eigen::Index(2))),
                   Drift::affine(-0.5 * Matrix::Identity(2, 2),
                                 v2(0.2, -0.1))),
       make_candidate(sq(2), FunctionSpec::zero(2), 0.0),
       ConvexSet::box(v2(0.2, 0.2), v2(1.0, 1.0)), v2(0.8, 0.8)});

  return list;
}

// interior sample cloud of a box window, filtered to rint(cl Dom A)
std::vector<Vector> window_points(const Scenario& sc, int n, uint64_t seed) {
  auto [lo, hi] = bounding_box(sc.region);
  LowDiscrepancy seq(static_cast<int>(lo.size()), seed);
  std::vector<Vector> pts;
  int guard = 0;
  while (static_cast<int>(pts.size()) < n && guard++ < 64 * n) {
    Vector t = seq.next();
    Vector y = lo + t.cwiseProduct(hi - lo);
    if (sc.region.contains(y) && rint_contains(sc.sys.A.domain(), y))
      pts.push_back(y);
  }
  return pts;
}

}  // namespace

TEST_CASE("criterion 1: exact-pair identity") {
  constexpr double kTrajTol = 5e-3;
  constexpr double kMarginTol = 1e-8;
  SystemSpec sys = half_line_decay();
  LyapunovCandidate cand = exact_pair();

  double traj_viol = check_trajectory(cand, sys, v1(1.0), 1.0, 1e-3);

  LowDiscrepancy seq(1, 1);
  double worst = -1e300;
  for (int k = 0; k < 100; ++k) {
    Vector y = v1(0.01 + 1.99 * seq.next()(0));
    worst = std::max(worst,
                     check_pointwise(cand, sys, y, CriterionVariant::i));
  }

  bool ok = traj_viol <= kTrajTol && worst <= kMarginTol;
  line(1, "exact-pair identity", ok,
       "traj " + num(traj_viol) + " <= 5e-3, margin " + num(worst) +
           " <= 1e-8");
  CHECK(traj_viol <= kTrajTol);
  CHECK(worst <= kMarginTol);
}

TEST_CASE("criterion 2: weighted pair stays constant") {
  constexpr double kRelTol = 0.01;
  SystemSpec sys = half_line_decay();
  FunctionSpec V =
      FunctionSpec::quadratic(Matrix::Identity(1, 1), Vector::Zero(1));

  Trajectory traj = simulate(sys, v1(1.0), 1.0, 1e-3);
  const double v0 = evaluate(V, traj.states.front());
  double worst = 0.0;
  for (size_t k = 0; k < traj.states.size(); ++k) {
    double scaled = std::exp(2.0 * traj.times[k]) *
                    evaluate(V, traj.states[k]);
    worst = std::max(worst, std::abs(scaled - v0) / v0);
  }

  bool ok = worst <= kRelTol;
  line(2, "weighted pair e^{2t}V constant", ok,
       "relative drift " + num(worst) + " <= 1e-2");
  CHECK(ok);
}

TEST_CASE("criterion 3: theorem-equivalence harness") {
  const CriterionVariant variants[] = {CriterionVariant::i,
                                       CriterionVariant::ii,
                                       CriterionVariant::iv,
                                       CriterionVariant::v,
                                       CriterionVariant::vi};
  int disagreements = 0;
  int scenarios = 0;
  int points_total = 0;
  for (const Scenario& sc : catalog()) {
    ++scenarios;
    for (const Vector& y : window_points(sc, 100, 7)) {
      ++points_total;
      const double tol = margin_tolerance(evaluate(sc.cand.V, y));
      int pass_mask = 0, n_var = 0;
      for (CriterionVariant v : variants) {
        bool pass = check_pointwise(sc.cand, sc.sys, y, v) <= tol;
        pass_mask |= (pass ? 1 : 0) << n_var++;
      }
      if (pass_mask != 0 && pass_mask != (1 << n_var) - 1) ++disagreements;
    }
  }

  bool ok = disagreements == 0 && scenarios >= 5 && points_total >= 500;
  line(3, "theorem equivalence (i,ii,iv,v,vi)", ok,
       std::to_string(scenarios) + " scenarios, " +
           std::to_string(points_total) + " points, " +
           std::to_string(disagreements) + " disagreements");
  CHECK(ok);
}

TEST_CASE("criterion 4: refutation of the growing flow") {
  constexpr double kMarginTol = 1e-9;
  SystemSpec sys = make_system(
      MonotoneOperator::normal_cone_of(half_line()),
      Drift::affine(Matrix::Constant(1, 1, 1.0), Vector::Zero(1)));
  LyapunovCandidate cand = make_candidate(
      FunctionSpec::quadratic(Matrix::Identity(1, 1), Vector::Zero(1)),
      FunctionSpec::zero(1), 0.0);

  double margin = check_pointwise(cand, sys, v1(1.0), CriterionVariant::i);
  double viol = check_trajectory(cand, sys, v1(1.0), 1.0, 1e-3);
  const double floor = std::exp(2.0) / 2.0 - 0.5 - 5e-3;

  CheckReport pw = certify(cand, sys, ConvexSet::box(v1(0.5), v1(1.0)), 50,
                           CriterionVariant::i, 1.0, 1e-3);
  CheckReport tr = certify_trajectory(cand, sys,
                                      ConvexSet::box(v1(0.5), v1(1.0)), 20,
                                      1.0, 1e-3);

  bool ok = std::abs(margin - 1.0) <= kMarginTol && viol >= floor &&
            pw.verdict == "Refuted" && tr.verdict == "Refuted";
  line(4, "refutation, pointwise and trajectory", ok,
       "margin " + num(margin) + ", violation " + num(viol) + " >= " +
           num(floor));
  CHECK(std::abs(margin - 1.0) <= kMarginTol);
  CHECK(viol >= floor);
  CHECK(pw.verdict == "Refuted");
  CHECK(tr.verdict == "Refuted");
}

TEST_CASE("criterion 5: resolvent firm nonexpansiveness") {
  constexpr double kSlack = 1e-9;
  constexpr int kPairs = 1000;

  std::vector<std::pair<const char*, MonotoneOperator>> ops;
  ops.emplace_back("zero", MonotoneOperator::zero(2));
  Matrix M(2, 2);
  M << 2.0, 1.0, -1.0, 1.0;
  ops.emplace_back("linear", MonotoneOperator::linear(M));
  ops.emplace_back("normal-cone",
                   MonotoneOperator::normal_cone_of(
                       ConvexSet::box(v2(-1.0, -1.0), v2(1.0, 1.0))));
  ops.emplace_back("subdiff",
                   MonotoneOperator::subdiff_of(
                       FunctionSpec::scaled_norm(1.0, 1, Eigen::Index(2))));
  Matrix S2 = Matrix::Identity(2, 2) * 1.5;
  ops.emplace_back(
      "sum", MonotoneOperator::sum(
                 MonotoneOperator::linear(S2),
                 MonotoneOperator::normal_cone_of(
                     ConvexSet::ball(Vector::Zero(2), 1.5))));
  ops.emplace_back("lifted",
                   MonotoneOperator::lifted(MonotoneOperator::linear(S2), 1));

  int bad = 0;
  double worst_gap = -1e300;
  for (const auto& [name, A] : ops) {
    auto g = oracles::rng(0x5eedULL ^ std::hash<std::string>{}(name));
    std::uniform_real_distribution<double> lam(0.05, 2.0);
    const int n = static_cast<int>(A.dim());
    for (int k = 0; k < kPairs; ++k) {
      double l = lam(g);
      Vector z1 = oracles::random_vector(g, n, -3.0, 3.0);
      Vector z2 = oracles::random_vector(g, n, -3.0, 3.0);
      Vector j1 = resolvent(A, l, z1);
      Vector j2 = resolvent(A, l, z2);
      double gap = (j1 - j2).squaredNorm() - (j1 - j2).dot(z1 - z2);
      worst_gap = std::max(worst_gap, gap);
      if (gap > kSlack) ++bad;
    }
  }

  bool ok = bad == 0;
  line(5, "firm nonexpansiveness, 1000/variant", ok,
       "6 variants, worst gap " + num(worst_gap) + " <= 1e-9");
  CHECK(ok);
}

TEST_CASE("criterion 6: semigroup property") {
  constexpr double kTol = 5e-3;
  double worst = 0.0;
  bool zero_exact = true;
  for (const Scenario& sc : catalog()) {
    // 0.3335/1e-3 rounds up on both legs, exercising the one-step mismatch
    worst = std::max(worst,
                     check_semigroup(sc.sys, sc.x0, 0.3335, 0.3335, 1e-3));
    worst = std::max(worst, check_semigroup(sc.sys, sc.x0, 0.4, 0.3, 1e-3));
    if (check_semigroup(sc.sys, sc.x0, 0.0, 0.3, 1e-3) != 0.0)
      zero_exact = false;
  }

  bool ok = worst <= kTol && zero_exact;
  line(6, "semigroup restart residual", ok,
       "worst " + num(worst) + " <= 5e-3, s=0 exact: " +
           (zero_exact ? "yes" : "no"));
  CHECK(worst <= kTol);
  CHECK(zero_exact);
}

TEST_CASE("criterion 7: Lipschitz flow estimate") {
  constexpr int kPairs = 50;
  constexpr double kT = 0.5;
  constexpr double kH = 1e-3;
  int bad = 0;
  double worst_ratio = 0.0;
  for (const Scenario& sc : catalog()) {
    auto pts = window_points(sc, 2 * kPairs, 11);
    for (int k = 0; k + 1 < static_cast<int>(pts.size()); k += 2) {
      try {
        FlowEstimate est =
            check_nonexpansive(sc.sys, pts[k], pts[k + 1], kT, kH);
        if (est.rhs > 0.0)
          worst_ratio = std::max(worst_ratio, est.lhs / est.rhs);
        if (est.lhs > est.rhs * (1.0 + 10.0 * kH)) ++bad;
      } catch (const Error&) {
        ++bad;
      }
    }
  }

  bool ok = bad == 0;
  line(7, "Lipschitz flow bound, 50 pairs/system", ok,
       "worst lhs/rhs " + num(worst_ratio) + " <= 1+10h");
  CHECK(ok);
}

TEST_CASE("criterion 8: Gronwall lemma on simulated scalars") {
  constexpr double kTol = 1e-6;
  const double pairs[3][2] = {{1.0, 0.0}, {-1.0, 1.0}, {2.0, 3.0}};
  bool ok = true;
  double worst = 0.0;
  for (const auto& ab : pairs) {
    const double a = ab[0], b = ab[1];
    const double h = 1e-3;
    std::vector<double> times, psi;
    double t = 0.0, x = 1.0;
    auto rhs = [&](double v) { return a * v + b; };
    times.push_back(t);
    psi.push_back(x);
    for (int k = 0; k < 1000; ++k) {
      // classic fourth-order step keeps the grid values at ~1e-13 error
      double k1 = rhs(x);
      double k2 = rhs(x + 0.5 * h * k1);
      double k3 = rhs(x + 0.5 * h * k2);
      double k4 = rhs(x + h * k3);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += h;
      times.push_back(t);
      psi.push_back(x);
    }
    for (size_t k = 0; k < times.size(); ++k) {
      double bound = (psi[0] + b / a) * std::exp(a * times[k]) - b / a;
      worst = std::max(worst, std::abs(psi[k] - bound));
    }
    ok = ok && verify_gronwall(times, psi, a, b);
  }
  ok = ok && worst <= kTol;

  line(8, "Gronwall bound attained", ok,
       "worst |psi - bound| " + num(worst) + " <= 1e-6");
  CHECK(ok);
}

TEST_CASE("criterion 9: order-one stepping") {
  SystemSpec sys = make_system(
      MonotoneOperator::zero(1),
      Drift::affine(Matrix::Constant(1, 1, -1.0), Vector::Zero(1)));
  const double hs[3] = {1e-2, 5e-3, 2.5e-3};
  double err[3];
  for (int i = 0; i < 3; ++i) {
    Trajectory traj = simulate(sys, v1(1.0), 1.0, hs[i]);
    err[i] = std::abs(traj.states.back()(0) - std::exp(-1.0));
  }
  double r1 = err[0] / err[1];
  double r2 = err[1] / err[2];

  bool ok = std::abs(r1 - 2.0) <= 0.2 && std::abs(r2 - 2.0) <= 0.2;
  line(9, "order-one halving", ok,
       "ratios " + num(r1) + ", " + num(r2) + " in 2 +- 0.2");
  CHECK(ok);
}

TEST_CASE("criterion 10: LCP certification against enumeration") {
  constexpr int kInstances = 1000;
  auto g = oracles::rng(0x1c9);
  int mism = 0, over = 0;
  double worst_res = 0.0, worst_diff = 0.0;
  for (int k = 0; k < kInstances; ++k) {
    const int m = 1 + k % 6;
    Matrix M = oracles::random_psd(g, m, 0.05);
    Vector q = oracles::random_vector(g, m, -2.0, 2.0);

    LCPSolution sol = solve_lcp(M, q);
    Eigen::VectorXd u_ref;
    REQUIRE(oracles::lcp_enumeration(M, q, u_ref));
    worst_diff = std::max(worst_diff, (sol.u - u_ref).lpNorm<Eigen::Infinity>());
    if ((sol.u - u_ref).lpNorm<Eigen::Infinity>() > 1e-7) ++mism;

    Vector w = q + M * sol.u;
    double res = std::max({-sol.u.minCoeff(), -w.minCoeff(),
                           std::abs(sol.u.dot(w))});
    worst_res = std::max(worst_res, res / (1.0 + q.norm()));
    if (res > 1e-10 * (1.0 + q.norm())) ++over;
  }

  bool ok = mism == 0 && over == 0;
  line(10, "LCP vs complementary enumeration", ok,
       "1000 instances, worst diff " + num(worst_diff) +
           ", scaled residual " + num(worst_res));
  CHECK(ok);
}

TEST_CASE("criterion 11: LCS bridge consistency") {
  constexpr double kT = 1.0;
  constexpr double kH = 1e-3;
  std::vector<LCSSystem> cases;
  cases.push_back(make_lcs(-Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                           Matrix::Identity(2, 2), Matrix::Zero(2, 2),
                           v2(1.0, 0.5)));
  Matrix rot(2, 2);
  rot << 0.0, 1.0, -1.0, 0.0;
  cases.push_back(make_lcs(rot, Matrix::Identity(2, 2),
                           Matrix::Identity(2, 2), Matrix::Zero(2, 2),
                           v2(0.0, 1.0)));
  Matrix push(2, 2);
  push << 0.0, -1.0, 0.0, -1.0;
  cases.push_back(make_lcs(push, Matrix::Identity(2, 2),
                           Matrix::Identity(2, 2), Matrix::Zero(2, 2),
                           v2(1.0, 1.0)));
  Matrix Cs = Matrix::Zero(2, 2);
  Cs(0, 0) = 1.0;
  Cs(1, 1) = 2.0;
  cases.push_back(make_lcs(-Matrix::Identity(2, 2), Cs.transpose(), Cs,
                           Matrix::Zero(2, 2), v2(1.0, 0.5)));

  double worst = 0.0;
  for (const LCSSystem& lcs : cases) {
    LCSTrajectory a = simulate_lcs(lcs, kT, kH);
    Trajectory b = simulate(lcs_to_inclusion(lcs), lcs.x0, kT, kH);
    REQUIRE(a.states.size() == b.states.size());
    for (size_t k = 0; k < a.states.size(); ++k)
      worst = std::max(
          worst, (a.states[k] - b.states[k]).lpNorm<Eigen::Infinity>());
  }

  bool ok = worst <= 10.0 * kH;
  line(11, "LCS vs resolvent stepping", ok,
       "sup gap " + num(worst) + " <= " + num(10.0 * kH));
  CHECK(ok);
}

TEST_CASE("criterion 12: Moreau envelope facts") {
  constexpr double kProxTol = 1e-6;
  std::vector<FunctionSpec> fns;
  fns.push_back(FunctionSpec::scaled_norm(1.0, 1, Eigen::Index(1)));
  fns.push_back(FunctionSpec::quadratic(Matrix::Identity(1, 1),
                                        Vector::Zero(1)));
  std::vector<FunctionSpec> pieces;
  pieces.push_back(FunctionSpec::affine(v1(1.0), 0.0));
  pieces.push_back(FunctionSpec::affine(v1(-2.0), 0.0));
  fns.push_back(FunctionSpec::max_of(std::move(pieces)));

  int dominated_bad = 0, monotone_bad = 0, points = 0;
  double worst_incl = 0.0;
  for (const FunctionSpec& f : fns) {
    FunctionSpec env = moreau_envelope(f, 0.5);
    LowDiscrepancy seq(1, 5);
    for (int k = 0; k < 3334; ++k) {
      Vector y = v1(-3.0 + 6.0 * seq.next()(0));
      ++points;
      if (evaluate(env, y) > evaluate(f, y) + 1e-12) ++dominated_bad;
    }
    // V_{1/k} nondecreasing in k: shrinking delta tightens the envelope
    for (int k = 1; k <= 4; ++k) {
      FunctionSpec lo = moreau_envelope(f, 1.0 / k);
      FunctionSpec hi = moreau_envelope(f, 1.0 / (k + 1));
      LowDiscrepancy grid(1, 9);
      for (int j = 0; j < 50; ++j) {
        Vector y = v1(-3.0 + 6.0 * grid.next()(0));
        if (evaluate(hi, y) < evaluate(lo, y) - 1e-9) ++monotone_bad;
      }
    }
    LowDiscrepancy starts(1, 13);
    for (int j = 0; j < 50; ++j) {
      Vector y = v1(-3.0 + 6.0 * starts.next()(0));
      Vector z = prox_point(f, 0.5, y);
      auto sub = subdifferential(f, z, SubdiffKind::Proximal);
      REQUIRE(sub.has_value());
      worst_incl =
          std::max(worst_incl, sub->distance(2.0 / 0.5 * (y - z)));
    }
  }

  bool ok = dominated_bad == 0 && monotone_bad == 0 &&
            worst_incl <= kProxTol && points >= 10000;
  line(12, "Moreau envelope domination and prox", ok,
       std::to_string(points) + " points, inclusion residual " +
           num(worst_incl) + " <= 1e-6");
  CHECK(ok);
}

TEST_CASE("criterion 13: invariance coherence") {
  SystemSpec sys = make_system(
      MonotoneOperator::zero(1),
      Drift::affine(Matrix::Constant(1, 1, -1.0), Vector::Zero(1)));
  ConvexSet s01 = ConvexSet::box(v1(0.0), v1(1.0));
  ConvexSet s12 = ConvexSet::box(v1(1.0), v1(2.0));

  auto set_verdicts = [&](const ConvexSet& S, double lo, double hi) {
    bool tangent = true, conv = true, traj = true;
    double m1 = -1e300, m2 = -1e300;
    for (double y = lo; y <= hi + 1e-12; y += (hi - lo) / 4.0) {
      Vector yy = v1(y);
      tangent = tangent && check_tangent(S, sys, yy);
      m1 = std::max(m1, check_normal(S, sys, yy, NormalVariant::MinSection));
      m2 = std::max(m2, check_normal(S, sys, yy, NormalVariant::SetMin));
      conv = conv && check_convexified(S, sys, yy);
      double d = check_trajectory_invariance(S, sys, yy, 1.0, 1e-3);
      traj = traj && d <= 10.0 * 1e-3 * (1.0 + yy.norm());
    }
    return std::array<bool, 5>{tangent, m1 <= 1e-9, m2 <= 1e-9, conv, traj};
  };

  auto in01 = set_verdicts(s01, 0.0, 1.0);
  auto in12 = set_verdicts(s12, 1.0, 2.0);
  bool coherent_01 = true, coherent_12 = true;
  for (bool b : in01) coherent_01 = coherent_01 && b;
  for (bool b : in12) coherent_12 = coherent_12 && !b;

  // indicator bridge: the normal-cone margin test and the Lyapunov
  // pointwise test on (indicator of S, 0, 0) must agree point by point
  bool bridge_ok = true;
  auto bridge = [&](const ConvexSet& S, double y) {
    LyapunovCandidate ind = make_candidate(
        FunctionSpec::plus_indicator(FunctionSpec::zero(1), S),
        FunctionSpec::zero(1), 0.0);
    bool inv = check_normal(S, sys, v1(y), NormalVariant::MinSection) <= 1e-9;
    bool lyap = check_pointwise(ind, sys, v1(y), CriterionVariant::ii) <=
                margin_tolerance(0.0);
    return inv == lyap;
  };
  for (double y : {0.3, 0.7, 1.0}) bridge_ok = bridge_ok && bridge(s01, y);
  for (double y : {1.0, 1.5, 2.0}) bridge_ok = bridge_ok && bridge(s12, y);

  bool ok = coherent_01 && coherent_12 && bridge_ok;
  line(13, "invariance coherence and bridge", ok,
       std::string("[0,1] invariant by all: ") +
           (coherent_01 ? "yes" : "no") + ", [1,2] refuted by all: " +
           (coherent_12 ? "yes" : "no") + ", bridge: " +
           (bridge_ok ? "agrees" : "disagrees"));
  CHECK(coherent_01);
  CHECK(coherent_12);
  CHECK(bridge_ok);
}
