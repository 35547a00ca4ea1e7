#include "monoflow/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"
#include "monoflow/sampling.hpp"

namespace monoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTolAbs = 1e-9;
constexpr double kTolRel = 1e-9;
constexpr int kRhoGrid = 32;
constexpr double kRhoTmax = 10.0;

// sup_{xi in P} [ <xi, fy> - support(Ay, xi) ], the variant (i) criterion
// body.  Evaluated over extreme points; a ray with positive asymptotic
// slope drives the supremum to +inf.
double value_i(const ConvexSet& P, const ConvexSet& Ay, const Vector& fy) {
  if (const auto* b = P.as<Ball>()) {
    require(b->center.norm() <= 1e-12, ErrorCode::NotRepresentable,
            "off-center subdifferential ball");
    // minimax swap: ball is compact, the payoff is bilinear
    return b->radius * Ay.distance(fy);
  }
  auto ext = generator_form(P);
  for (const auto& r : ext.rays)
    if (r.dot(fy) - Ay.support(r) > 1e-12) return kInf;
  double best = -kInf;
  for (const auto& g : ext.vertices)
    best = std::max(best, g.dot(fy) - Ay.support(g));
  return best;
}

// inf_{v in Ay} max_{xi in P} <xi, fy - v> for polyhedral P and Ay, as an
// epigraph LP over the generator parametrization of Ay
double min_support_lp(const GeneratorForm& P, const GeneratorForm& Ay,
                      const Vector& fy) {
  std::vector<Vector> verts = Ay.vertices;
  if (verts.empty()) verts.push_back(Vector::Zero(fy.size()));
  const auto K = static_cast<Eigen::Index>(verts.size());
  const auto J = static_cast<Eigen::Index>(Ay.rays.size());
  const auto nv = 1 + K + J;
  const auto m =
      static_cast<Eigen::Index>(P.vertices.size() + P.rays.size()) + K + J;

  LinearProgram lp;
  lp.c = Vector::Zero(nv);
  lp.c(0) = 1.0;
  lp.A_ub = Matrix::Zero(m, nv);
  lp.b_ub = Vector::Zero(m);
  Eigen::Index row = 0;
  for (const auto& g : P.vertices) {
    lp.A_ub(row, 0) = -1.0;
    for (Eigen::Index k = 0; k < K; ++k) lp.A_ub(row, 1 + k) = -g.dot(verts[k]);
    for (Eigen::Index j = 0; j < J; ++j)
      lp.A_ub(row, 1 + K + j) = -g.dot(Ay.rays[j]);
    lp.b_ub(row) = -g.dot(fy);
    ++row;
  }
  for (const auto& q : P.rays) {  // finite support of P requires these
    for (Eigen::Index k = 0; k < K; ++k) lp.A_ub(row, 1 + k) = -q.dot(verts[k]);
    for (Eigen::Index j = 0; j < J; ++j)
      lp.A_ub(row, 1 + K + j) = -q.dot(Ay.rays[j]);
    lp.b_ub(row) = -q.dot(fy);
    ++row;
  }
  for (Eigen::Index k = 0; k < K + J; ++k) lp.A_ub(row++, 1 + k) = -1.0;
  lp.A_eq = Matrix::Zero(1, nv);
  lp.A_eq.block(0, 1, 1, K).setOnes();
  lp.b_eq = Vector::Ones(1);

  auto sol = solve_lp(lp);
  if (sol.status == LpStatus::Unbounded) return -kInf;
  if (sol.status == LpStatus::Infeasible) return kInf;
  return sol.value;
}

// inf_{v in Ay} V'(y; fy - v), the variant (v) criterion body
double value_v(const FunctionSpec& V, const Vector& y,
               const std::optional<ConvexSet>& P, const ConvexSet& Ay,
               const Vector& fy) {
  if (const auto* s = Ay.as<Singleton>())
    return dini_derivative(V, y, fy - s->point);
  if (P) {
    // proximal subdifferential nonempty: the Dini derivative is the
    // support function of P for every representable variant
    if (const auto* s = P->as<Singleton>())
      return s->point.dot(fy) - Ay.support(s->point);
    if (const auto* b = P->as<Ball>()) {
      require(b->center.norm() <= 1e-12, ErrorCode::NotRepresentable,
              "off-center subdifferential ball");
      return b->radius * Ay.distance(fy);
    }
    require(!Ay.as<Ball>(), ErrorCode::NotRepresentable,
            "set-valued Dini minimization over a ball image");
    return min_support_lp(generator_form(*P), generator_form(Ay), fy);
  }
  // downward kink: the Dini derivative is the infimum over the limiting
  // hull, so the minimization separates over its extremes
  auto L = subdifferential(V, y, SubdiffKind::Limiting);
  if (!L) return dini_derivative(V, y, fy - Ay.project(fy));
  if (const auto* b = L->as<Ball>()) {
    auto ext = generator_form(Ay);
    if (!ext.rays.empty()) return -kInf;
    double worst = 0.0;
    for (const auto& v : ext.vertices) worst = std::max(worst, (fy - v).norm());
    return -b->radius * worst;
  }
  auto ext = generator_form(*L);
  for (const auto& r : ext.rays)
    if (r.dot(fy) - Ay.support(r) < -1e-12) return -kInf;
  double best = kInf;
  for (const auto& g : ext.vertices)
    best = std::min(best, g.dot(fy) - Ay.support(g));
  return best;
}

std::vector<Vector> sample_points(const ConvexSet& region,
                                  const ConvexSet& domV,
                                  const ConvexSet& domA, int n,
                                  uint64_t seed) {
  auto [lo, hi] = bounding_box(region);
  LowDiscrepancy seq(static_cast<int>(region.dim()), seed);
  std::vector<Vector> out;
  const int attempts = std::max(512, 64 * n);
  for (int k = 0; k < attempts && static_cast<int>(out.size()) < n; ++k) {
    Vector u = seq.next();
    Vector x = lo.array() + u.array() * (hi - lo).array();
    if (!region.contains(x)) continue;
    if (!domV.contains(x)) continue;
    if (!rint_contains(domA, x)) continue;
    out.push_back(std::move(x));
  }
  require(!out.empty(), ErrorCode::EmptySampleSet,
          "no admissible sample points in the region");
  return out;
}

double trajectory_violation(const LyapunovCandidate& cand,
                            const SystemSpec& sys, const Vector& y, double T,
                            double h, double* worst_time) {
  auto traj = simulate(sys, y, T, h);
  double Vy = evaluate(cand.V, y);
  double integral = 0.0;
  double prevW = evaluate(cand.W, traj.states.front());
  double worst = 0.0;  // k = 0 term is exactly zero
  if (worst_time) *worst_time = 0.0;
  for (size_t k = 1; k < traj.states.size(); ++k) {
    double Wk = evaluate(cand.W, traj.states[k]);
    integral += 0.5 * h * (prevW + Wk);
    prevW = Wk;
    double term = std::exp(cand.a * traj.times[k]) *
                      evaluate(cand.V, traj.states[k]) +
                  integral - Vy;
    if (term > worst) {
      worst = term;
      if (worst_time) *worst_time = traj.times[k];
    }
  }
  return worst;
}

}  // namespace

const char* to_string(CriterionVariant v) {
  switch (v) {
    case CriterionVariant::i: return "i";
    case CriterionVariant::ii: return "ii";
    case CriterionVariant::iv: return "iv";
    case CriterionVariant::v: return "v";
    case CriterionVariant::vi: return "vi";
  }
  return "?";
}

CriterionVariant criterion_from_string(const std::string& s) {
  if (s == "i") return CriterionVariant::i;
  if (s == "ii") return CriterionVariant::ii;
  if (s == "iv") return CriterionVariant::iv;
  if (s == "v") return CriterionVariant::v;
  if (s == "vi") return CriterionVariant::vi;
  fail(ErrorCode::SetupViolation, "unknown criterion variant: " + s);
}

LyapunovCandidate make_candidate(FunctionSpec V, FunctionSpec W, double a) {
  require(V.dim() == W.dim(), ErrorCode::DimensionMismatch,
          "candidate: V and W dimensions differ");
  require(a >= 0.0, ErrorCode::SetupViolation, "candidate: a < 0");
  // W >= 0 on a deterministic desk-scale cloud
  LowDiscrepancy seq(static_cast<int>(W.dim()), 3);
  for (int k = 0; k < 128; ++k) {
    Vector x = W.domain().project(Vector(16.0 * seq.next().array() - 8.0));
    double w = evaluate(W, x);
    require(!(w < -1e-9), ErrorCode::NotNonnegative,
            "candidate: W sampled negative");
  }
  return LyapunovCandidate{std::move(V), std::move(W), a};
}

double margin_tolerance(double Vy) { return kTolAbs + kTolRel * std::abs(Vy); }

double check_pointwise(const LyapunovCandidate& cand, const SystemSpec& sys,
                       const Vector& y, CriterionVariant variant) {
  double Vy = evaluate(cand.V, y);
  require(std::isfinite(Vy), ErrorCode::DomainViolation, "y outside Dom V");
  double Wy = evaluate(cand.W, y);
  require(std::isfinite(Wy), ErrorCode::DomainViolation, "y outside Dom W");
  require(rint_contains(sys.A.domain(), y), ErrorCode::NotInterior,
          "y not in the relative interior of cl(Dom A)");

  Vector fy = sys.f.evaluate(y);
  ConvexSet Ay = evaluate(sys.A, y);
  // variant (vi) rewrites (V, W, a) as (V, aV + W, 0); the criterion body
  // is that of (i) and the additive shift is unchanged
  double shift = cand.a * Vy + Wy;

  auto P = subdifferential(cand.V, y, SubdiffKind::Proximal);
  double value;
  switch (variant) {
    case CriterionVariant::i:
    case CriterionVariant::vi:
      value = P ? value_i(*P, Ay, fy) : -kInf;
      break;
    case CriterionVariant::ii:
      value = P ? P->support(fy - Ay.project(fy)) : -kInf;
      break;
    case CriterionVariant::iv:
      value = dini_derivative(cand.V, y, fy - Ay.project(fy));
      break;
    case CriterionVariant::v:
      value = value_v(cand.V, y, P, Ay, fy);
      break;
    default:
      fail(ErrorCode::SetupViolation, "unknown variant");
  }
  return value + shift;
}

double check_trajectory(const LyapunovCandidate& cand, const SystemSpec& sys,
                        const Vector& y, double T, double h) {
  return trajectory_violation(cand, sys, y, T, h, nullptr);
}

CheckReport certify(const LyapunovCandidate& cand, const SystemSpec& sys,
                    const ConvexSet& region, int n_samples,
                    CriterionVariant variant, double T, double h,
                    uint64_t seed, uint64_t config_hash) {
  require(n_samples > 0, ErrorCode::SetupViolation, "certify: n_samples <= 0");
  auto points = sample_points(region, cand.V.domain(), sys.A.domain(),
                              n_samples, seed);

  CheckReport rep;
  rep.mode = "pointwise";
  rep.variant = to_string(variant);
  rep.n_points = static_cast<int>(points.size());
  rep.tol_abs = kTolAbs;
  rep.tol_rel = kTolRel;
  rep.tol_traj = 10.0 * h;  // scaled per point by (1 + |V(y)|)
  rep.config_hash = config_hash;
  rep.worst_margin = -kInf;
  rep.witness = points.front();

  bool refuted = false;
  Vector refutation_witness = points.front();
  double refutation_time = 0.0;
  for (const auto& y : points) {
    double Vy = evaluate(cand.V, y);
    if (!subdifferential(cand.V, y, SubdiffKind::Proximal)) ++rep.n_empty;
    double margin = check_pointwise(cand, sys, y, variant);
    bool point_pass = !(margin > margin_tolerance(Vy));
    if (margin > rep.worst_margin) {
      rep.worst_margin = margin;
      rep.witness = y;
    }
    double t_viol = 0.0;
    double violation = trajectory_violation(cand, sys, y, T, h, &t_viol);
    bool traj_pass = violation <= 10.0 * h * (1.0 + std::abs(Vy));
    if (point_pass && !traj_pass) rep.consistency_ok = false;
    if (!point_pass || !traj_pass) {
      if (!refuted) {
        refutation_witness = y;
        refutation_time = traj_pass ? 0.0 : t_viol;
      }
      refuted = true;
    }
  }
  if (refuted) {
    rep.verdict = "Refuted";
    rep.witness = refutation_witness;
    rep.witness_time = refutation_time;
  } else if (rep.n_empty == rep.n_points) {
    rep.verdict = "Inconclusive";
  } else {
    rep.verdict = "Certified-on-samples";
  }
  return rep;
}

CheckReport certify_trajectory(const LyapunovCandidate& cand,
                               const SystemSpec& sys, const ConvexSet& region,
                               int n_samples, double T, double h,
                               uint64_t seed, uint64_t config_hash) {
  require(n_samples > 0, ErrorCode::SetupViolation, "certify: n_samples <= 0");
  auto points = sample_points(region, cand.V.domain(), sys.A.domain(),
                              n_samples, seed);
  CheckReport rep;
  rep.mode = "trajectory";
  rep.variant = "trajectory";
  rep.n_points = static_cast<int>(points.size());
  rep.tol_abs = kTolAbs;
  rep.tol_rel = kTolRel;
  rep.tol_traj = 10.0 * h;
  rep.config_hash = config_hash;
  rep.worst_margin = -kInf;
  rep.witness = points.front();

  bool refuted = false;
  for (const auto& y : points) {
    double Vy = evaluate(cand.V, y);
    double t_viol = 0.0;
    double violation = trajectory_violation(cand, sys, y, T, h, &t_viol);
    double excess = violation - 10.0 * h * (1.0 + std::abs(Vy));
    if (excess > rep.worst_margin) {
      rep.worst_margin = excess;
      rep.witness = y;
      rep.witness_time = t_viol;
    }
    if (excess > 0.0) refuted = true;
  }
  rep.verdict = refuted ? "Refuted" : "Certified-on-samples";
  return rep;
}

std::string to_json(const CheckReport& r) {
  nlohmann::ordered_json j;
  j["mode"] = r.mode;
  j["variant"] = r.variant;
  j["n_points"] = r.n_points;
  j["worst_margin"] = r.worst_margin;
  j["witness"] = {
      {"point", std::vector<double>(r.witness.data(),
                                    r.witness.data() + r.witness.size())},
      {"time", r.witness_time}};
  j["verdict"] = r.verdict;
  j["tolerances"] = {{"abs", r.tol_abs}, {"rel", r.tol_rel},
                     {"traj", r.tol_traj}};
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(r.config_hash));
  j["config_hash"] = buf;
  return j.dump(2);
}

double gronwall_bound(double a, double b, double psi1, double t1, double t) {
  require(a != 0.0, ErrorCode::ZeroCoefficient, "gronwall: a = 0");
  require(b >= 0.0, ErrorCode::SetupViolation, "gronwall: b < 0");
  require(psi1 >= 0.0, ErrorCode::SetupViolation, "gronwall: psi1 < 0");
  require(t >= t1, ErrorCode::SetupViolation, "gronwall: t < t1");
  return (psi1 + b / a) * std::exp(a * (t - t1)) - b / a;
}

bool verify_gronwall(const std::vector<double>& times,
                     const std::vector<double>& psi, double a, double b) {
  require(times.size() == psi.size() && !times.empty(),
          ErrorCode::SetupViolation, "gronwall: sample shapes");
  for (size_t k = 0; k < times.size(); ++k) {
    if (psi[k] > gronwall_bound(a, b, psi[0], times[0], times[k]) + 1e-6)
      return false;
  }
  return true;
}

double rho_horizon(const LyapunovCandidate& cand, const SystemSpec& sys,
                   const Vector& y, double rho_bar, double lambda_bar,
                   double h) {
  require(h > 0.0 && rho_bar >= 0.0, ErrorCode::SetupViolation,
          "rho_horizon: need h > 0, rho_bar >= 0");
  require(sys.A.domain().contains(y), ErrorCode::SetupViolation,
          "rho_horizon: y outside cl(Dom A)");
  double Vy = evaluate(cand.V, y);
  require(std::isfinite(Vy) && Vy > lambda_bar, ErrorCode::SetupViolation,
          "rho_horizon: y not strictly above the level");

  const auto n = y.size();
  double rho_max = std::min(rho_bar, 8.0 * (1.0 + y.norm()));
  if (!(rho_max > 0.0)) return 0.0;

  // sampled admissibility of B_rho(y) within the level region
  auto level_ok = [&](double rho) {
    if (rho > rho_bar) return false;
    if (std::isinf(lambda_bar) && lambda_bar < 0.0) return true;
    LowDiscrepancy seq(static_cast<int>(n), 17);
    for (int k = 0; k < 48; ++k) {
      Vector p = 2.0 * Vector(seq.next()).array() - 1.0;
      if (k % 2 == 0) {
        if (p.norm() < 1e-12) p = Vector::Unit(n, 0);
        p /= p.norm();
      } else if (p.norm() > 1.0) {
        p /= p.norm();
      }
      if (!(evaluate(cand.V, y + rho * p) > lambda_bar)) return false;
    }
    return true;
  };

  // equilibrium with vanishing weight terms: both conditions are
  // identically zero, so any admissible rho gives an unbounded horizon
  if (right_derivative(sys, y).norm() <= 1e-12 &&
      cand.a * std::abs(Vy) <= 1e-15 &&
      evaluate(cand.W, y) <= 1e-15) {
    for (int jj = 0; jj < kRhoGrid; ++jj)
      if (level_ok(rho_max * std::pow(2.0, -jj))) return kInf;
    return 0.0;
  }

  auto traj = simulate(sys, y, kRhoTmax, h);
  const auto N = traj.states.size();
  std::vector<double> prox(N), weight(N);
  double integral = 0.0;
  double prevW = evaluate(cand.W, traj.states.front());
  prox[0] = 0.0;
  weight[0] = 0.0;
  for (size_t k = 1; k < N; ++k) {
    double Wk = evaluate(cand.W, traj.states[k]);
    integral += 0.5 * h * (prevW + Wk);
    prevW = Wk;
    prox[k] = 2.0 * (traj.states[k] - y).norm();
    weight[k] =
        std::abs((std::exp(-cand.a * traj.times[k]) - 1.0) * Vy - integral);
  }

  double best = 0.0;
  for (int jj = 0; jj < kRhoGrid; ++jj) {
    double rho = rho_max * std::pow(2.0, -jj);
    if (!level_ok(rho)) continue;
    double nu = 0.0;
    for (size_t k = 0; k < N; ++k) {
      if (prox[k] < 0.5 * rho && weight[k] < 0.5 * rho)
        nu = traj.times[k];
      else
        break;
    }
    best = std::max(best, nu);
  }
  return best;
}

bool check_regularity(const FunctionSpec& V, const MonotoneOperator& A,
                      const Vector& y, int n_samples) {
  require(A.domain().contains(y), ErrorCode::DomainViolation,
          "regularity: y outside cl(Dom A)");
  double Vy = evaluate(V, y);
  require(std::isfinite(Vy), ErrorCode::DomainViolation,
          "regularity: y outside Dom V");
  require(n_samples > 0, ErrorCode::SetupViolation, "regularity: n_samples");

  const auto n = y.size();
  const int per = std::max(4, n_samples / 13);
  LowDiscrepancy seq(static_cast<int>(n), 23);
  std::vector<double> shell_minima;
  for (int k = 4; k <= 16; ++k) {
    const double r = std::pow(2.0, -k);
    double shell_min = kInf;
    for (int s = 0; s < per; ++s) {
      Vector p = 2.0 * Vector(seq.next()).array() - 1.0;
      if (p.norm() < 1e-12) continue;
      p /= p.norm();
      Vector z = A.domain().project(y + r * p);
      double d = (z - y).norm();
      if (d <= 1e-15 || d > 1.5 * r) continue;
      double v = evaluate(V, z);
      if (std::isfinite(v)) shell_min = std::min(shell_min, v);
    }
    if (shell_min < kInf) shell_minima.push_back(shell_min);
  }
  if (shell_minima.empty()) return true;  // no approach inside Dom A
  size_t tail = std::min<size_t>(3, shell_minima.size());
  for (size_t k = shell_minima.size() - tail; k < shell_minima.size(); ++k)
    if (std::abs(shell_minima[k] - Vy) > 1e-4) return false;
  return true;
}

SystemSpec augment(const SystemSpec& sys, const LyapunovCandidate& cand) {
  // W is assumed Lipschitz on cl(Dom A); regularize_W supplies a surrogate
  // when it is not
  return make_system(MonotoneOperator::lifted(sys.A, 2),
                     Drift::augmented(sys.f, cand.W));
}

Vector closed_form_z(const SystemSpec& sys, const LyapunovCandidate& cand,
                     double t, const Vector& y, double alpha, double gamma,
                     double h) {
  auto traj = simulate(sys, y, t, h);
  double integral = 0.0;
  double prevW = evaluate(cand.W, traj.states.front());
  for (size_t k = 1; k < traj.states.size(); ++k) {
    double Wk = evaluate(cand.W, traj.states[k]);
    integral += 0.5 * h * (prevW + Wk);
    prevW = Wk;
  }
  Vector z(y.size() + 2);
  z << traj.states.back(), integral + alpha, gamma;
  return z;
}

}  // namespace monoflow
