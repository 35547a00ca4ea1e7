#include "monoflow/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace monoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kActiveTol = 1e-9;   // piece activity, relative
constexpr double kKinkTol = 1e-12;    // "is this coordinate at the kink"
constexpr int kProxNewtonCap = 60;
constexpr int kSplitCap = 50000;

double norm_p(const Vector& u, int p) {
  return p == 1 ? u.lpNorm<1>() : u.norm();
}

const FunctionSpec& base_of(const PlusIndicator& v) { return *v.base; }
const FunctionSpec& base_of(const Envelope& v) { return *v.base; }

bool piece_is_smooth(const FunctionSpec& f) {
  return f.as<Quadratic>() != nullptr || f.as<AffineFn>() != nullptr;
}

Vector piece_gradient(const FunctionSpec& f, const Vector& x) {
  if (const auto* q = f.as<Quadratic>()) return q->P * x + q->q;
  return f.as<AffineFn>()->q;
}

std::vector<int> active_pieces(const MaxOf& m, const Vector& x,
                               double* vmax_out = nullptr) {
  std::vector<double> vals;
  vals.reserve(m.pieces.size());
  double vmax = -kInf;
  for (const auto& p : m.pieces) {
    vals.push_back(evaluate(p, x));
    vmax = std::max(vmax, vals.back());
  }
  std::vector<int> act;
  for (int i = 0; i < static_cast<int>(vals.size()); ++i)
    if (vals[i] >= vmax - kActiveTol * (1.0 + std::abs(vmax))) act.push_back(i);
  if (vmax_out) *vmax_out = vmax;
  return act;
}

bool quadratic_is_psd(const Matrix& P) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
  double scale = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff();
  return es.eigenvalues().minCoeff() >= -1e-9 * scale;
}

// Bounded-below test on the convex catalog.  Exact for Quadratic, Affine,
// ScaledNorm and all-affine MaxOf; conservative (accepts) for the mixed
// cases where the envelope is finite regardless.
bool bounded_below(const FunctionSpec& f) {
  if (const auto* q = f.as<Quadratic>()) {
    Vector xs = q->P.completeOrthogonalDecomposition().solve(-q->q);
    return (q->P * xs + q->q).norm() <= 1e-8 * (1.0 + q->q.norm());
  }
  if (const auto* a = f.as<AffineFn>()) return a->q.norm() <= 1e-12;
  if (const auto* s = f.as<ScaledNorm>()) return s->weight >= 0.0;
  if (const auto* m = f.as<MaxOf>()) {
    bool all_affine = true;
    for (const auto& p : m->pieces) {
      if (bounded_below(p)) return true;
      if (!p.as<AffineFn>()) all_affine = false;
    }
    if (!all_affine) return true;
    // max of affines is bounded below iff 0 is in the hull of the slopes
    const Eigen::Index n = f.dim();
    const auto mm = static_cast<Eigen::Index>(m->pieces.size());
    LinearProgram lp;
    lp.c = Vector::Zero(mm);
    lp.A_eq.resize(n + 1, mm);
    for (Eigen::Index j = 0; j < mm; ++j)
      lp.A_eq.col(j).head(n) = m->pieces[static_cast<size_t>(j)].as<AffineFn>()->q;
    lp.A_eq.row(n).setOnes();
    lp.b_eq = Vector::Zero(n + 1);
    lp.b_eq(n) = 1.0;
    lp.A_ub = -Matrix::Identity(mm, mm);
    lp.b_ub = Vector::Zero(mm);
    return solve_lp(lp).status == LpStatus::Optimal;
  }
  // constrained case: finite envelope is guaranteed for a convex base, so
  // accept; an unbounded-below restriction is the caller's precondition
  if (f.as<PlusIndicator>()) return true;
  return bounded_below(base_of(*f.as<Envelope>()));
}

Vector prox_impl(const FunctionSpec& f, double delta, const Vector& y);

double envelope_value(const FunctionSpec& base, double delta,
                      const Vector& y) {
  Vector z = prox_impl(base, delta, y);
  return evaluate(base, z) + (y - z).squaredNorm() / delta;
}

Vector soft_threshold(const Vector& u, double tau) {
  Vector z(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    z(i) = std::copysign(std::max(std::abs(u(i)) - tau, 0.0), u(i));
  return z;
}

// minimize max_i phi_i(z) + (1/delta)||z-y||^2 by active-set enumeration.
// Caratheodory: some active set of size <= n+1 carries the optimum.
Vector prox_max_of(const MaxOf& m, double delta, const Vector& y) {
  const auto n = y.size();
  const int npieces = static_cast<int>(m.pieces.size());
  const int max_size = std::min<int>(npieces, static_cast<int>(n) + 1);

  auto phi = [&](int i, const Vector& z) {
    return evaluate(m.pieces[static_cast<size_t>(i)], z);
  };
  auto grad = [&](int i, const Vector& z) {
    return piece_gradient(m.pieces[static_cast<size_t>(i)], z);
  };
  auto hess = [&](int i) -> Matrix {
    if (const auto* q = m.pieces[static_cast<size_t>(i)].as<Quadratic>())
      return q->P;
    return Matrix::Zero(n, n);
  };

  const double rho = 2.0 / delta;
  const double scale = 1.0 + y.norm();

  std::vector<std::vector<int>> subsets;
  for (unsigned mask = 1; mask < (1u << npieces); ++mask) {
    std::vector<int> s;
    for (int i = 0; i < npieces; ++i)
      if (mask & (1u << i)) s.push_back(i);
    if (static_cast<int>(s.size()) <= max_size) subsets.push_back(std::move(s));
  }
  std::stable_sort(subsets.begin(), subsets.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });

  for (const auto& S : subsets) {
    const auto k = static_cast<Eigen::Index>(S.size());
    Vector z = y;
    Vector mu = Vector::Constant(k, 1.0 / static_cast<double>(k));
    bool ok = false;
    if (k == 1) {
      Vector qi = grad(S[0], Vector::Zero(n));  // affine part of the gradient
      Matrix H = hess(S[0]) + rho * Matrix::Identity(n, n);
      z = H.llt().solve(rho * y - qi);
      ok = true;
    } else {
      for (int it = 0; it < kProxNewtonCap; ++it) {
        Vector F(n + k);
        Vector g0 = rho * (z - y);
        for (Eigen::Index j = 0; j < k; ++j) g0 += mu(j) * grad(S[static_cast<size_t>(j)], z);
        F.head(n) = g0;
        for (Eigen::Index j = 1; j < k; ++j)
          F(n + j - 1) = phi(S[0], z) - phi(S[static_cast<size_t>(j)], z);
        F(n + k - 1) = mu.sum() - 1.0;

        if (F.norm() <= 1e-12 * scale) {
          ok = true;
          break;
        }
        Matrix J = Matrix::Zero(n + k, n + k);
        Matrix Hz = rho * Matrix::Identity(n, n);
        for (Eigen::Index j = 0; j < k; ++j) Hz += mu(j) * hess(S[static_cast<size_t>(j)]);
        J.topLeftCorner(n, n) = Hz;
        for (Eigen::Index j = 0; j < k; ++j)
          J.col(n + j).head(n) = grad(S[static_cast<size_t>(j)], z);
        for (Eigen::Index j = 1; j < k; ++j)
          J.row(n + j - 1).head(n) =
              (grad(S[0], z) - grad(S[static_cast<size_t>(j)], z)).transpose();
        J.row(n + k - 1).segment(n, k).setOnes();

        Eigen::FullPivLU<Matrix> lu(J);
        if (!lu.isInvertible()) break;
        Vector step = lu.solve(F);
        z -= step.head(n);
        mu -= step.tail(k);
        if (!z.allFinite() || z.norm() > 1e10) break;
      }
      if (ok) {
        Vector F(n + k);
        Vector g0 = rho * (z - y);
        for (Eigen::Index j = 0; j < k; ++j) g0 += mu(j) * grad(S[static_cast<size_t>(j)], z);
        if (g0.norm() > 1e-9 * scale) ok = false;
      }
    }
    if (!ok) continue;

    // certificate: multipliers nonnegative, chosen pieces truly maximal
    if (k > 1 && mu.minCoeff() < -1e-9) continue;
    double vS = phi(S[0], z);
    bool feasible = true;
    for (int i = 0; i < npieces; ++i)
      if (phi(i, z) > vS + 1e-8 * (1.0 + std::abs(vS))) feasible = false;
    if (!feasible) continue;
    if (k == 1) {
      Vector g0 = rho * (z - y) + grad(S[0], z);
      if (g0.norm() > 1e-9 * scale) continue;
    }
    return z;
  }
  fail(ErrorCode::SolverFailure, "max-of prox: no certified active set");
}

// minimize base(z) + (1/delta)||z-y||^2 over z in C via Douglas-Rachford;
// the two proximal maps are exact, so the split converges linearly (the
// coupling term is strongly convex).
Vector prox_plus_indicator(const PlusIndicator& pi, double delta,
                           const Vector& y) {
  const FunctionSpec& base = base_of(pi);
  const ConvexSet& C = pi.domain;

  // affine and isotropic-quadratic bases reduce to a single projection
  if (const auto* a = base.as<AffineFn>())
    return C.project(y - 0.5 * delta * a->q);
  if (const auto* q = base.as<Quadratic>()) {
    const auto n = y.size();
    double alpha = q->P.trace() / static_cast<double>(n);
    if ((q->P - alpha * Matrix::Identity(n, n)).norm() <= 1e-12 * (1.0 + std::abs(alpha)) &&
        alpha >= 0.0) {
      double w = alpha / 2.0 + 1.0 / delta;
      return C.project((y / delta - 0.5 * q->q) / w);
    }
  }

  // split at gamma = delta/2: the coupling prox is proj_C of a midpoint
  Vector s = y;
  for (int it = 0; it < kSplitCap; ++it) {
    Vector za = prox_impl(base, delta, s);
    Vector zb = C.project(0.5 * (y + 2.0 * za - s));
    s += zb - za;
    if ((zb - za).norm() <= 1e-12 * (1.0 + y.norm())) return zb;
  }
  fail(ErrorCode::IterationCap, "constrained prox split did not converge");
}

Vector prox_impl(const FunctionSpec& f, double delta, const Vector& y) {
  if (const auto* q = f.as<Quadratic>()) {
    const auto n = y.size();
    Matrix H = q->P + (2.0 / delta) * Matrix::Identity(n, n);
    return H.llt().solve((2.0 / delta) * y - q->q);
  }
  if (const auto* a = f.as<AffineFn>()) return y - 0.5 * delta * a->q;
  if (const auto* s = f.as<ScaledNorm>()) {
    double tau = s->weight * delta / 2.0;
    Vector u = y - s->center;
    if (s->p == 1) return s->center + soft_threshold(u, tau);
    double nu = u.norm();
    double shrink = nu > tau ? (1.0 - tau / nu) : 0.0;
    return s->center + shrink * u;
  }
  if (const auto* m = f.as<MaxOf>()) return prox_max_of(*m, delta, y);
  if (const auto* pi = f.as<PlusIndicator>())
    return prox_plus_indicator(*pi, delta, y);
  // envelopes compose: the inner weight adds to the outer one
  const auto* e = f.as<Envelope>();
  Vector u = prox_impl(base_of(*e), e->delta + delta, y);
  return (delta * u + e->delta * y) / (e->delta + delta);
}

// approximate-global-minimum probe used by the nonnegativity precondition;
// sound for rejection (the value always upper-bounds the infimum)
double infimum_probe(const FunctionSpec& f) {
  Vector y0 = Vector::Zero(f.dim());
  if (const auto* pi = f.as<PlusIndicator>()) y0 = pi->domain.project(y0);
  Vector z = prox_impl(f, 1e8, y0);
  return evaluate(f, z);
}

bool provably_nonnegative(const FunctionSpec& f) {
  if (const auto* q = f.as<Quadratic>()) {
    if (!bounded_below(f)) return false;
    Vector xs = q->P.completeOrthogonalDecomposition().solve(-q->q);
    return evaluate(f, xs) >= -1e-9;
  }
  if (const auto* a = f.as<AffineFn>())
    return a->q.norm() <= 1e-12 && a->c >= -1e-12;
  if (const auto* s = f.as<ScaledNorm>()) return s->weight >= 0.0;
  if (const auto* e = f.as<Envelope>()) return provably_nonnegative(base_of(*e));
  return infimum_probe(f) >= -1e-6;
}

}  // namespace

FunctionSpec::FunctionSpec(Rep rep, bool convex)
    : rep_(std::make_shared<const Rep>(std::move(rep))), convex_(convex) {}

FunctionSpec FunctionSpec::quadratic(Matrix P, Vector q, double c) {
  require(P.rows() == P.cols() && P.rows() == q.size(),
          ErrorCode::DimensionMismatch, "quadratic: P/q shapes");
  require((P - P.transpose()).norm() <= 1e-9 * (1.0 + P.norm()),
          ErrorCode::SetupViolation, "quadratic: P must be symmetric");
  Matrix Ps = 0.5 * (P + P.transpose());
  bool convex = quadratic_is_psd(Ps);
  return FunctionSpec(Quadratic{std::move(Ps), std::move(q), c}, convex);
}

FunctionSpec FunctionSpec::affine(Vector q, double c) {
  require(q.size() >= 1, ErrorCode::DimensionMismatch, "affine: empty q");
  return FunctionSpec(AffineFn{std::move(q), c}, true);
}

FunctionSpec FunctionSpec::scaled_norm(double weight, int p, Eigen::Index dim) {
  return scaled_norm(weight, p, Vector::Zero(dim));
}

FunctionSpec FunctionSpec::scaled_norm(double weight, int p, Vector center) {
  require(p == 1 || p == 2, ErrorCode::SetupViolation,
          "scaled_norm: p must be 1 or 2");
  require(center.size() >= 1, ErrorCode::DimensionMismatch,
          "scaled_norm: empty center");
  bool convex = weight >= 0.0;
  return FunctionSpec(ScaledNorm{weight, p, std::move(center)}, convex);
}

FunctionSpec FunctionSpec::max_of(std::vector<FunctionSpec> pieces) {
  require(!pieces.empty(), ErrorCode::SetupViolation, "max_of: no pieces");
  require(pieces.size() <= 16, ErrorCode::SetupViolation,
          "max_of: too many pieces");
  bool convex = true;
  for (const auto& p : pieces) {
    require(piece_is_smooth(p), ErrorCode::SetupViolation,
            "max_of: pieces must be Quadratic or Affine");
    require(p.dim() == pieces.front().dim(), ErrorCode::DimensionMismatch,
            "max_of: piece dimensions differ");
    convex = convex && p.is_convex();
  }
  return FunctionSpec(MaxOf{std::move(pieces)}, convex);
}

FunctionSpec FunctionSpec::plus_indicator(FunctionSpec base, ConvexSet domain) {
  require(base.dim() == domain.dim(), ErrorCode::DimensionMismatch,
          "plus_indicator: base/domain dimensions differ");
  require(base.as<PlusIndicator>() == nullptr, ErrorCode::SetupViolation,
          "plus_indicator: base must be finite-valued");
  bool convex = base.is_convex();
  return FunctionSpec(
      PlusIndicator{std::make_shared<const FunctionSpec>(std::move(base)),
                    std::move(domain)},
      convex);
}

FunctionSpec FunctionSpec::envelope(FunctionSpec base, double delta) {
  require(delta > 0.0, ErrorCode::SetupViolation, "envelope: delta <= 0");
  require(base.is_convex(), ErrorCode::NotConvex,
          "envelope: base must be convex");
  require(bounded_below(base), ErrorCode::UnboundedBelow,
          "envelope: base must be bounded below");
  if (const auto* e = base.as<Envelope>())
    return envelope(base_of(*e), delta + e->delta);
  return FunctionSpec(
      Envelope{std::make_shared<const FunctionSpec>(std::move(base)), delta},
      true);
}

FunctionSpec FunctionSpec::zero(Eigen::Index dim) {
  return affine(Vector::Zero(dim), 0.0);
}

Eigen::Index FunctionSpec::dim() const {
  if (const auto* q = as<Quadratic>()) return q->q.size();
  if (const auto* a = as<AffineFn>()) return a->q.size();
  if (const auto* s = as<ScaledNorm>()) return s->center.size();
  if (const auto* m = as<MaxOf>()) return m->pieces.front().dim();
  if (const auto* p = as<PlusIndicator>()) return p->domain.dim();
  return base_of(*as<Envelope>()).dim();
}

const char* FunctionSpec::variant_name() const {
  if (as<Quadratic>()) return "quadratic";
  if (as<AffineFn>()) return "affine";
  if (as<ScaledNorm>()) return "scaled_norm";
  if (as<MaxOf>()) return "max_of";
  if (as<PlusIndicator>()) return "plus_indicator";
  return "envelope";
}

ConvexSet FunctionSpec::domain() const {
  if (const auto* p = as<PlusIndicator>()) return p->domain;
  return ConvexSet::whole_space(dim());
}

double evaluate(const FunctionSpec& f, const Vector& x) {
  require(x.size() == f.dim(), ErrorCode::DimensionMismatch,
          "evaluate: dimension mismatch");
  if (const auto* q = f.as<Quadratic>())
    return 0.5 * x.dot(q->P * x) + q->q.dot(x) + q->c;
  if (const auto* a = f.as<AffineFn>()) return a->q.dot(x) + a->c;
  if (const auto* s = f.as<ScaledNorm>())
    return s->weight * norm_p(x - s->center, s->p);
  if (const auto* m = f.as<MaxOf>()) {
    double v = -kInf;
    for (const auto& p : m->pieces) v = std::max(v, evaluate(p, x));
    return v;
  }
  if (const auto* pi = f.as<PlusIndicator>()) {
    if (!pi->domain.contains(x)) return kInf;
    return evaluate(base_of(*pi), x);
  }
  const auto* e = f.as<Envelope>();
  return envelope_value(base_of(*e), e->delta, x);
}

std::optional<ConvexSet> subdifferential(const FunctionSpec& f,
                                         const Vector& x, SubdiffKind kind) {
  require(x.size() == f.dim(), ErrorCode::DimensionMismatch,
          "subdifferential: dimension mismatch");
  require(std::isfinite(evaluate(f, x)), ErrorCode::DomainViolation,
          "subdifferential: point outside effective domain");
  const auto n = x.size();

  if (kind == SubdiffKind::Horizontal) {
    if (const auto* pi = f.as<PlusIndicator>())
      return pi->domain.normal_cone(x);
    return ConvexSet::singleton(Vector::Zero(n));
  }

  if (const auto* q = f.as<Quadratic>())
    return ConvexSet::singleton(q->P * x + q->q);
  if (const auto* a = f.as<AffineFn>()) return ConvexSet::singleton(a->q);

  if (const auto* s = f.as<ScaledNorm>()) {
    const double w = s->weight;
    Vector u = x - s->center;
    if (s->p == 2) {
      double nu = u.norm();
      if (nu > kKinkTol * (1.0 + x.norm()))
        return ConvexSet::singleton((w / nu) * u);
      if (w > 0.0) return ConvexSet::ball(Vector::Zero(n), w);
      if (w == 0.0) return ConvexSet::singleton(Vector::Zero(n));
      // downward kink: no local quadratic minorant exists
      if (kind == SubdiffKind::Proximal || kind == SubdiffKind::Frechet)
        return std::nullopt;
      return ConvexSet::ball(Vector::Zero(n), -w);
    }
    bool at_kink = false;
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(u(i)) <= kKinkTol * (1.0 + std::abs(x(i)))) at_kink = true;
    if (!at_kink) {
      Vector g(n);
      for (Eigen::Index i = 0; i < n; ++i) g(i) = w * (u(i) > 0 ? 1.0 : -1.0);
      return ConvexSet::singleton(g);
    }
    if (w < 0.0 &&
        (kind == SubdiffKind::Proximal || kind == SubdiffKind::Frechet))
      return std::nullopt;
    Vector lo(n), hi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(u(i)) <= kKinkTol * (1.0 + std::abs(x(i)))) {
        lo(i) = -std::abs(w);
        hi(i) = std::abs(w);
      } else {
        lo(i) = hi(i) = w * (u(i) > 0 ? 1.0 : -1.0);
      }
    }
    return ConvexSet::box(lo, hi);
  }

  if (const auto* m = f.as<MaxOf>()) {
    auto act = active_pieces(*m, x);
    if (act.size() == 1)
      return ConvexSet::singleton(
          piece_gradient(m->pieces[static_cast<size_t>(act[0])], x));
    // upward kink of smooth pieces: the hull of active gradients is a
    // proximal bundle, and it exhausts Clarke, so every kind coincides
    std::vector<Vector> verts;
    for (int i : act)
      verts.push_back(piece_gradient(m->pieces[static_cast<size_t>(i)], x));
    return ConvexSet::vpolyhedron(std::move(verts));
  }

  if (const auto* pi = f.as<PlusIndicator>()) {
    auto inner = subdifferential(base_of(*pi), x, kind);
    if (!inner) return std::nullopt;
    ConvexSet nc = pi->domain.normal_cone(x);
    if (const auto* z = nc.as<Singleton>(); z && z->point.norm() == 0.0)
      return inner;
    auto rays = cone_generators(nc);
    require(rays.has_value(), ErrorCode::NotRepresentable,
            "subdifferential: normal cone has no generator form");
    std::vector<Vector> verts;
    std::vector<Vector> all_rays = *rays;
    if (const auto* pt = inner->as<Singleton>()) {
      verts.push_back(pt->point);
    } else if (const auto* vp = inner->as<VPolyhedron>()) {
      verts = vp->vertices;
      all_rays.insert(all_rays.end(), vp->rays.begin(), vp->rays.end());
    } else if (const auto* bx = inner->as<Box>()) {
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < n; ++i)
        if (bx->hi(i) > bx->lo(i)) free.push_back(i);
      require(free.size() <= 12, ErrorCode::NotRepresentable,
              "subdifferential: box sum too large to enumerate");
      for (unsigned mask = 0; mask < (1u << free.size()); ++mask) {
        Vector v = bx->lo;
        for (size_t j = 0; j < free.size(); ++j)
          if (mask & (1u << j)) v(free[j]) = bx->hi(free[j]);
        verts.push_back(std::move(v));
      }
    } else {
      fail(ErrorCode::NotRepresentable,
           "subdifferential: sum with normal cone not representable");
    }
    return ConvexSet::vpolyhedron(std::move(verts), std::move(all_rays));
  }

  const auto* e = f.as<Envelope>();
  Vector z = prox_impl(base_of(*e), e->delta, x);
  return ConvexSet::singleton(2.0 * (x - z) / e->delta);
}

double dini_derivative(const FunctionSpec& f, const Vector& x,
                       const Vector& v) {
  require(x.size() == f.dim() && v.size() == f.dim(),
          ErrorCode::DimensionMismatch, "dini: dimension mismatch");
  require(std::isfinite(evaluate(f, x)), ErrorCode::DomainViolation,
          "dini: point outside effective domain");

  if (const auto* q = f.as<Quadratic>()) return (q->P * x + q->q).dot(v);
  if (const auto* a = f.as<AffineFn>()) return a->q.dot(v);
  if (const auto* s = f.as<ScaledNorm>()) {
    Vector u = x - s->center;
    if (s->p == 2) {
      double nu = u.norm();
      if (nu > kKinkTol * (1.0 + x.norm())) return s->weight * u.dot(v) / nu;
      return s->weight * v.norm();
    }
    double d = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (std::abs(u(i)) <= kKinkTol * (1.0 + std::abs(x(i))))
        d += s->weight * std::abs(v(i));
      else
        d += s->weight * (u(i) > 0 ? v(i) : -v(i));
    }
    return d;
  }
  if (const auto* m = f.as<MaxOf>()) {
    // the one-sided limit along the ray exists for a max of smooth pieces
    // and Lipschitz continuity collapses the liminf over nearby directions
    auto act = active_pieces(*m, x);
    double d = -kInf;
    for (int i : act)
      d = std::max(d, piece_gradient(m->pieces[static_cast<size_t>(i)], x).dot(v));
    return d;
  }
  if (const auto* pi = f.as<PlusIndicator>()) {
    if (!pi->domain.tangent_cone_contains(x, v)) return kInf;
    return dini_derivative(base_of(*pi), x, v);
  }
  const auto* e = f.as<Envelope>();
  Vector z = prox_impl(base_of(*e), e->delta, x);
  return (2.0 / e->delta) * (x - z).dot(v);
}

double dini_derivative_numeric(const FunctionSpec& f, const Vector& x,
                               const Vector& v) {
  const double f0 = evaluate(f, x);
  require(std::isfinite(f0), ErrorCode::DomainViolation,
          "dini: point outside effective domain");
  const auto n = x.size();
  double best = kInf;
  // late dyadic window; perturbations of norm <= t keep the liminf honest
  for (int k = 12; k <= 20; ++k) {
    double t = std::ldexp(1.0, -k);
    for (int j = 0; j <= 8; ++j) {
      Vector w = v;
      if (j > 0) {
        Eigen::Index coord = static_cast<Eigen::Index>((j - 1) / 2) % n;
        w(coord) += (j % 2 ? t : -t);
      }
      double val = evaluate(f, x + t * w);
      if (!std::isfinite(val)) continue;
      best = std::min(best, (val - f0) / t);
    }
  }
  return best;
}

FunctionSpec moreau_envelope(const FunctionSpec& f, double delta) {
  return FunctionSpec::envelope(f, delta);
}

Vector prox_point(const FunctionSpec& f, double delta, const Vector& y) {
  require(bounded_below(f), ErrorCode::UnboundedBelow,
          "prox: function unbounded below");
  return prox_minimizer(f, delta, y);
}

Vector prox_minimizer(const FunctionSpec& f, double delta, const Vector& y) {
  require(delta > 0.0, ErrorCode::SetupViolation, "prox: delta <= 0");
  require(y.size() == f.dim(), ErrorCode::DimensionMismatch,
          "prox: dimension mismatch");
  require(f.is_convex(), ErrorCode::NotConvex, "prox: function not convex");
  Vector z = prox_impl(f, delta, y);

  // optimality inclusion 2(y - z)/delta in subdifferential(f, z)
  Vector xi = 2.0 * (y - z) / delta;
  try {
    auto sd = subdifferential(f, z, SubdiffKind::Clarke);
    if (sd) {
      double gap = (xi - sd->project(xi)).norm();
      require(gap <= 1e-6 * (1.0 + xi.norm()), ErrorCode::SolverFailure,
              "prox: optimality certificate failed");
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotRepresentable) throw;
  }
  return z;
}

FunctionSpec regularize_W(const FunctionSpec& w, int k) {
  require(k >= 1, ErrorCode::SetupViolation, "regularize_W: k < 1");
  require(w.is_convex(), ErrorCode::NotConvex, "regularize_W: W not convex");
  require(provably_nonnegative(w), ErrorCode::NotNonnegative,
          "regularize_W: W must be nonnegative");
  return FunctionSpec::envelope(w, 1.0 / static_cast<double>(k));
}

}  // namespace monoflow
