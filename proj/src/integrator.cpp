#include "monoflow/integrator.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "monoflow/sampling.hpp"

namespace monoflow {

namespace {

constexpr double kStepResidualTol = 1e-8;
constexpr double kProbeStep = 1e-2;  // internal step for the bound probe

double spectral_norm(const Matrix& F) {
  if (F.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(F);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

// largest norm of an element, +inf on unbounded sets
double set_norm_sup(const ConvexSet& s) {
  if (const auto* p = s.as<Singleton>()) return p->point.norm();
  if (const auto* b = s.as<Ball>()) return b->center.norm() + b->radius;
  if (const auto* b = s.as<Box>()) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < b->lo.size(); ++i) {
      double m = std::max(std::abs(b->lo(i)), std::abs(b->hi(i)));
      acc += m * m;
    }
    return std::sqrt(acc);
  }
  if (const auto* v = s.as<VPolyhedron>()) {
    if (!v->rays.empty()) return std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (const auto& x : v->vertices) m = std::max(m, x.norm());
    return m;
  }
  return std::numeric_limits<double>::infinity();
}

// sampled estimate of sup ||subgradient of W|| at desk scale; used only to
// size step caps and flow-estimate right-hand sides for augmented systems
double sampled_w_lipschitz(const FunctionSpec& W) {
  const auto n = W.dim();
  LowDiscrepancy seq(static_cast<int>(n), 2);
  double lip = 1.0;
  for (int k = 0; k < 64; ++k) {
    Vector u = seq.next();
    Vector x = 16.0 * u.array() - 8.0;
    if (!std::isfinite(evaluate(W, x))) continue;
    auto sd = subdifferential(W, x, SubdiffKind::Clarke);
    if (!sd) continue;
    double m = set_norm_sup(*sd);
    if (std::isfinite(m)) lip = std::max(lip, m);
  }
  return lip;
}

// sampled nonempty-interior probe for the standing assumption flag
bool interior_probe(const ConvexSet& s) {
  if (s.as<WholeSpace>()) return true;
  if (const auto* b = s.as<Ball>()) return b->radius > 0.0;
  if (const auto* b = s.as<Box>()) return (b->hi - b->lo).minCoeff() > 0.0;
  if (s.as<Singleton>()) return false;
  if (const auto* c = s.as<PolyhedralCone>()) {
    if (c->generators.empty()) return false;
    Matrix G(c->dim, static_cast<Eigen::Index>(c->generators.size()));
    for (size_t j = 0; j < c->generators.size(); ++j)
      G.col(static_cast<Eigen::Index>(j)) = c->generators[j];
    return G.colPivHouseholderQr().rank() == c->dim;
  }
  const auto n = s.dim();
  LowDiscrepancy seq(static_cast<int>(n), 5);
  for (int k = 0; k < 32; ++k) {
    Vector u = seq.next();
    Vector x = s.project(Vector(6.0 * u.array() - 3.0));
    if (s.strictly_contains(x, 1e-9)) return true;
  }
  return false;
}

}  // namespace

Drift::Drift(Rep rep) : rep_(std::make_shared<const Rep>(std::move(rep))) {}

Drift Drift::affine(Matrix F, Vector b) {
  require(F.rows() == F.cols() && F.rows() == b.size(),
          ErrorCode::DimensionMismatch, "drift: F/b shapes");
  return Drift(AffineDrift{std::move(F), std::move(b)});
}

Drift Drift::saturated(Matrix F, Vector b, double level) {
  require(F.rows() == F.cols() && F.rows() == b.size(),
          ErrorCode::DimensionMismatch, "drift: F/b shapes");
  require(level > 0.0, ErrorCode::SetupViolation, "drift: level <= 0");
  return Drift(SaturatedDrift{std::move(F), std::move(b), level, false});
}

Drift Drift::tanh_sat(Matrix F, Vector b, double level) {
  require(F.rows() == F.cols() && F.rows() == b.size(),
          ErrorCode::DimensionMismatch, "drift: F/b shapes");
  require(level > 0.0, ErrorCode::SetupViolation, "drift: level <= 0");
  return Drift(SaturatedDrift{std::move(F), std::move(b), level, true});
}

Drift Drift::augmented(Drift base, FunctionSpec W) {
  require(base.dim() == W.dim(), ErrorCode::DimensionMismatch,
          "drift: W dimension must match the base drift");
  double w_lip = sampled_w_lipschitz(W);
  return Drift(AugmentedDrift{std::make_shared<const Drift>(std::move(base)),
                              std::move(W), w_lip});
}

Vector Drift::evaluate(const Vector& x) const {
  require(x.size() == dim(), ErrorCode::DimensionMismatch,
          "drift: dimension mismatch");
  if (const auto* a = as<AffineDrift>()) return a->F * x + a->b;
  if (const auto* s = as<SaturatedDrift>()) {
    Vector v = s->F * x + s->b;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v(i) = s->use_tanh ? s->level * std::tanh(v(i) / s->level)
                         : std::clamp(v(i), -s->level, s->level);
    return v;
  }
  const auto* g = as<AugmentedDrift>();
  const auto n = g->base->dim();
  Vector out = Vector::Zero(n + 2);
  out.head(n) = g->base->evaluate(x.head(n));
  out(n) = monoflow::evaluate(g->W, x.head(n));
  return out;
}

double Drift::lipschitz() const {
  if (const auto* a = as<AffineDrift>()) return spectral_norm(a->F);
  if (const auto* s = as<SaturatedDrift>()) return spectral_norm(s->F);
  const auto* g = as<AugmentedDrift>();
  return g->base->lipschitz() + g->w_lip;
}

Eigen::Index Drift::dim() const {
  if (const auto* a = as<AffineDrift>()) return a->b.size();
  if (const auto* s = as<SaturatedDrift>()) return s->b.size();
  return as<AugmentedDrift>()->base->dim() + 2;
}

SystemSpec make_system(MonotoneOperator A, Drift f) {
  require(A.dim() == f.dim(), ErrorCode::DimensionMismatch,
          "system: operator/drift dimension mismatch");
  double L = f.lipschitz();
  bool interior = interior_probe(A.domain());
  return SystemSpec{std::move(A), std::move(f), L, interior};
}

Vector right_derivative(const SystemSpec& sys, const Vector& y) {
  Vector fy = sys.f.evaluate(y);
  return fy - project_onto_value(sys.A, y, fy);
}

Vector step(const SystemSpec& sys, const Vector& x, double h) {
  require(h > 0.0, ErrorCode::SetupViolation, "step: h <= 0");
  require(sys.A.domain().contains(x), ErrorCode::OutsideDomain,
          "step: state outside cl(Dom A)");
  Vector z = x + h * sys.f.evaluate(x);
  Vector next = resolvent(sys.A, h, z);
  // discrete inclusion certificate (the resolvent already certified the
  // scaled form; this is the per-step 1e-8 contract)
  try {
    double res = evaluate(sys.A, next).distance((z - next) / h);
    require(res <= kStepResidualTol, ErrorCode::SolverFailure,
            "step: inclusion residual " + std::to_string(res));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotRepresentable &&
        e.code() != ErrorCode::UnsupportedVariant)
      throw;
  }
  return next;
}

Trajectory simulate(const SystemSpec& sys, const Vector& x0, double T,
                    double h) {
  require(h > 0.0 && T >= 0.0, ErrorCode::SetupViolation,
          "simulate: need h > 0 and T >= 0");
  require(sys.A.domain().contains(x0), ErrorCode::OutsideDomain,
          "simulate: initial point outside cl(Dom A)");
  const auto N = static_cast<Eigen::Index>(std::ceil(T / h - 1e-9));

  Trajectory traj;
  traj.h = h;
  traj.times.reserve(static_cast<size_t>(N) + 1);
  traj.states.reserve(static_cast<size_t>(N) + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  Vector x = x0;
  for (Eigen::Index k = 0; k < N; ++k) {
    Vector z = x + h * sys.f.evaluate(x);
    Vector next = resolvent(sys.A, h, z);
    double res = 0.0;
    try {
      res = evaluate(sys.A, next).distance((z - next) / h);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotRepresentable &&
          e.code() != ErrorCode::UnsupportedVariant)
        throw;
      res = 1e-9 * (1.0 + z.norm()) / h;  // resolvent-certified bound
    }
    require(res <= kStepResidualTol, ErrorCode::SolverFailure,
            "simulate: inclusion residual " + std::to_string(res) +
                " at step " + std::to_string(k));
    traj.right_derivatives.push_back((next - x) / h);
    traj.residuals.push_back(res);
    x = next;
    traj.times.push_back(static_cast<double>(k + 1) * h);
    traj.states.push_back(x);
  }
  return traj;
}

double check_semigroup(const SystemSpec& sys, const Vector& x0, double s,
                       double t, double h) {
  require(s >= 0.0 && t >= 0.0, ErrorCode::SetupViolation,
          "semigroup: negative times");
  Vector xt = simulate(sys, x0, t, h).states.back();
  Vector restart = simulate(sys, xt, s, h).states.back();
  Vector through = simulate(sys, x0, s + t, h).states.back();
  return (restart - through).norm();
}

FlowEstimate check_nonexpansive(const SystemSpec& sys, const Vector& x0,
                                const Vector& y0, double t, double h) {
  Vector xt = simulate(sys, x0, t, h).states.back();
  Vector yt = simulate(sys, y0, t, h).states.back();
  FlowEstimate est{(xt - yt).norm(),
                   std::exp(sys.L_f * t) * (x0 - y0).norm()};
  require(est.lhs <= est.rhs * (1.0 + 10.0 * h) + 1e-12,
          ErrorCode::SolverFailure, "flow estimate violated");
  return est;
}

LocalBound local_bound_probe(const SystemSpec& sys, const Vector& ybar,
                             double rho, int samples) {
  require(rho > 0.0 && samples > 0, ErrorCode::SetupViolation,
          "probe: need rho > 0 and samples > 0");
  require(sys.A.domain().contains_ball(ybar, rho * (1.0 + 1e-9)),
          ErrorCode::BallNotInterior, "probe: ball not inside the domain");
  const auto n = ybar.size();

  // alternate sphere and interior points so the extremes of the ball are hit
  LowDiscrepancy seq(static_cast<int>(n), 11);
  std::vector<Vector> points;
  points.reserve(static_cast<size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    Vector p = 2.0 * Vector(seq.next()).array() - 1.0;
    if (k % 2 == 0) {
      if (p.norm() < 1e-12) p = Vector::Unit(n, 0);
      p /= p.norm();
    } else if (p.norm() > 1.0) {
      p /= p.norm();
    }
    points.push_back(ybar + rho * p);
  }

  double M = 0.0;
  for (const auto& z : points) M = std::max(M, right_derivative(sys, z).norm());

  double denom = std::exp(sys.L_f) * M;
  double worst = 0.0;
  const double h = kProbeStep;
  const int starts = std::min(samples, 20);
  const int stride = std::max(samples / starts, 1);
  for (int i = 0; i < starts; ++i) {
    auto traj = simulate(sys, points[static_cast<size_t>(i * stride)], 1.0, h);
    for (const auto& d : traj.right_derivatives) {
      if (denom <= 1e-15) {
        if (d.norm() > 1e-12) worst = std::numeric_limits<double>::infinity();
        continue;
      }
      worst = std::max(worst, d.norm() / denom);
    }
  }
  require(worst <= 1.0 + 10.0 * h, ErrorCode::SolverFailure,
          "probe: discrete speed exceeded the local bound");
  return LocalBound{M, worst};
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const auto n = traj.states.empty() ? 0 : traj.states.front().size();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  out << ",residual\n";
  char buf[32];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << sep;
  };
  for (size_t k = 0; k < traj.states.size(); ++k) {
    put(traj.times[k], ',');
    for (Eigen::Index i = 0; i < n; ++i) put(traj.states[k](i), ',');
    double res = k == 0 ? 0.0 : traj.residuals[k - 1];
    std::snprintf(buf, sizeof buf, "%.17g", res);
    out << buf << '\n';
  }
}

}  // namespace monoflow
