#include "monoflow/operators.hpp"

#include <cmath>

namespace monoflow {

namespace {

constexpr int kResolventCap = 10000;

bool sym_part_psd(const Matrix& M) {
  Matrix S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  double scale = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff();
  return es.eigenvalues().minCoeff() >= -1e-9 * scale;
}

bool smooth_fn(const FunctionSpec& f) {
  return f.as<Quadratic>() || f.as<AffineFn>() || f.as<Envelope>();
}

// gradient of a smooth convex catalog member
Vector smooth_gradient(const FunctionSpec& f, const Vector& x) {
  auto sd = subdifferential(f, x, SubdiffKind::Proximal);
  return sd->as<Singleton>()->point;
}

// Lipschitz modulus of the gradient of a smooth member (safe upper bound)
double gradient_modulus(const FunctionSpec& f) {
  if (const auto* q = f.as<Quadratic>()) return q->P.norm();
  if (f.as<AffineFn>()) return 0.0;
  return 2.0 / f.as<Envelope>()->delta;
}

// lambda * S for the value sets the catalog produces; cones are fixed points
ConvexSet scale_set(const ConvexSet& s, double lambda) {
  if (const auto* p = s.as<Singleton>())
    return ConvexSet::singleton(lambda * p->point);
  if (const auto* v = s.as<VPolyhedron>()) {
    std::vector<Vector> verts;
    for (const auto& x : v->vertices) verts.push_back(lambda * x);
    return ConvexSet::vpolyhedron(std::move(verts), v->rays);
  }
  if (const auto* b = s.as<Ball>())
    return ConvexSet::ball(lambda * b->center, lambda * b->radius);
  if (const auto* b = s.as<Box>()) return ConvexSet::box(lambda * b->lo, lambda * b->hi);
  if (const auto* p = s.as<Polyhedron>())
    return ConvexSet::polyhedron(p->G, lambda * p->h);
  if (const auto* i = s.as<Intersection>()) {
    std::vector<ConvexSet> parts;
    for (const auto& part : i->parts) parts.push_back(scale_set(part, lambda));
    return ConvexSet::intersection(std::move(parts));
  }
  return s;  // WholeSpace and cones are scale-invariant
}

// widen an n-dimensional set to n+extra coordinates left free
ConvexSet free_tail(const ConvexSet& s, Eigen::Index extra) {
  const auto n = s.dim();
  auto widen = [&](const Vector& v) {
    Vector w = Vector::Zero(n + extra);
    w.head(n) = v;
    return w;
  };
  if (s.as<WholeSpace>()) return ConvexSet::whole_space(n + extra);
  if (const auto* p = s.as<Polyhedron>()) {
    Matrix G = Matrix::Zero(p->G.rows(), n + extra);
    G.leftCols(n) = p->G;
    return ConvexSet::polyhedron(G, p->h);
  }
  if (const auto* b = s.as<Box>()) {
    Matrix G = Matrix::Zero(2 * n, n + extra);
    Vector h(2 * n);
    G.topLeftCorner(n, n) = Matrix::Identity(n, n);
    G.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
    h.head(n) = b->hi;
    h.tail(n) = -b->lo;
    return ConvexSet::polyhedron(G, h);
  }
  if (const auto* p = s.as<Singleton>()) {
    Matrix G = Matrix::Zero(2 * n, n + extra);
    Vector h(2 * n);
    G.topLeftCorner(n, n) = Matrix::Identity(n, n);
    G.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
    h.head(n) = p->point;
    h.tail(n) = -p->point;
    return ConvexSet::polyhedron(G, h);
  }
  if (const auto* i = s.as<Intersection>()) {
    std::vector<ConvexSet> parts;
    for (const auto& part : i->parts) parts.push_back(free_tail(part, extra));
    return ConvexSet::intersection(std::move(parts));
  }
  if (const auto* c = s.as<PolyhedralCone>()) {
    std::vector<Vector> gens;
    for (const auto& g : c->generators) gens.push_back(widen(g));
    for (Eigen::Index j = 0; j < extra; ++j) {
      Vector e = Vector::Zero(n + extra);
      e(n + j) = 1.0;
      gens.push_back(e);
      gens.push_back(-e);
    }
    return ConvexSet::cone(n + extra, std::move(gens));
  }
  fail(ErrorCode::UnsupportedVariant, "lifted: domain is not liftable");
}

// value set widened with exact zeros on the tail coordinates
ConvexSet zero_tail(const ConvexSet& s, Eigen::Index extra) {
  const auto n = s.dim();
  auto widen = [&](const Vector& v) {
    Vector w = Vector::Zero(n + extra);
    w.head(n) = v;
    return w;
  };
  if (const auto* p = s.as<Singleton>()) return ConvexSet::singleton(widen(p->point));
  if (const auto* v = s.as<VPolyhedron>()) {
    std::vector<Vector> verts, rays;
    for (const auto& x : v->vertices) verts.push_back(widen(x));
    for (const auto& r : v->rays) rays.push_back(widen(r));
    return ConvexSet::vpolyhedron(std::move(verts), std::move(rays));
  }
  if (const auto* c = s.as<PolyhedralCone>()) {
    std::vector<Vector> gens;
    for (const auto& g : c->generators) gens.push_back(widen(g));
    return ConvexSet::cone(n + extra, std::move(gens));
  }
  if (const auto* b = s.as<Box>()) {
    Vector lo = Vector::Zero(n + extra), hi = Vector::Zero(n + extra);
    lo.head(n) = b->lo;
    hi.head(n) = b->hi;
    return ConvexSet::box(lo, hi);
  }
  fail(ErrorCode::UnsupportedVariant, "lifted: value set is not liftable");
}

// strongly monotone VI over C: find x in C with <F(x), c - x> >= 0 for all
// c in C, where F(x) = x + lambda*S(x) - z and S is the single-valued part
Vector solve_sum_resolvent(const SumOp& op, double lambda, const Vector& z) {
  const ConvexSet& C = op.cone->as<NormalConeOp>()->set;

  // affine single-valued part collapses to a plain projection
  if (const auto* sd = op.smooth->as<SubdiffOp>()) {
    if (const auto* a = sd->fn.as<AffineFn>()) return C.project(z - lambda * a->q);
  }

  auto S = [&](const Vector& x) -> Vector {
    if (const auto* lin = op.smooth->as<LinearOp>()) return lin->M * x;
    return smooth_gradient(op.smooth->as<SubdiffOp>()->fn, x);
  };
  double Lg = op.smooth->as<LinearOp>() != nullptr
                  ? op.smooth->as<LinearOp>()->M.norm()
                  : gradient_modulus(op.smooth->as<SubdiffOp>()->fn);
  const double L = 1.0 + lambda * Lg;
  const double gamma = 1.0 / (L * L);  // strong monotonicity modulus is >= 1

  Vector x = C.project(z);
  for (int it = 0; it < kResolventCap; ++it) {
    Vector next = C.project(x - gamma * (x + lambda * S(x) - z));
    double move = (next - x).norm();
    x = next;
    if (move <= 1e-13 * (1.0 + z.norm())) return x;
  }
  fail(ErrorCode::SolverFailure, "sum resolvent: projected iteration stalled");
}

}  // namespace

MonotoneOperator::MonotoneOperator(Rep rep, ConvexSet domain)
    : rep_(std::make_shared<const Rep>(std::move(rep))),
      domain_(std::move(domain)) {}

MonotoneOperator MonotoneOperator::zero(Eigen::Index dim) {
  require(dim >= 1, ErrorCode::DimensionMismatch, "zero: dim < 1");
  return MonotoneOperator(ZeroOp{dim}, ConvexSet::whole_space(dim));
}

MonotoneOperator MonotoneOperator::linear(Matrix M) {
  require(M.rows() == M.cols() && M.rows() >= 1, ErrorCode::DimensionMismatch,
          "linear: M must be square");
  require(sym_part_psd(M), ErrorCode::SetupViolation,
          "linear: M + M' must be PSD (monotonicity)");
  auto dim = M.rows();
  return MonotoneOperator(LinearOp{std::move(M)}, ConvexSet::whole_space(dim));
}

MonotoneOperator MonotoneOperator::normal_cone_of(ConvexSet set) {
  ConvexSet domain = set;
  return MonotoneOperator(NormalConeOp{std::move(set)}, std::move(domain));
}

MonotoneOperator MonotoneOperator::subdiff_of(FunctionSpec fn) {
  require(fn.is_convex(), ErrorCode::NotConvex,
          "subdiff_of: function must be convex");
  ConvexSet domain = fn.domain();
  return MonotoneOperator(SubdiffOp{std::move(fn)}, std::move(domain));
}

MonotoneOperator MonotoneOperator::sum(MonotoneOperator smooth,
                                       MonotoneOperator cone) {
  require(smooth.dim() == cone.dim(), ErrorCode::DimensionMismatch,
          "sum: dimension mismatch");
  require(cone.as<NormalConeOp>() != nullptr, ErrorCode::SetupViolation,
          "sum: second part must be a normal cone");
  bool ok = smooth.as<LinearOp>() != nullptr ||
            (smooth.as<SubdiffOp>() != nullptr &&
             smooth_fn(smooth.as<SubdiffOp>()->fn));
  require(ok, ErrorCode::SetupViolation,
          "sum: first part must be Linear or a smooth subdifferential");
  ConvexSet domain = cone.as<NormalConeOp>()->set;
  return MonotoneOperator(
      SumOp{std::make_shared<const MonotoneOperator>(std::move(smooth)),
            std::make_shared<const MonotoneOperator>(std::move(cone))},
      std::move(domain));
}

MonotoneOperator MonotoneOperator::lifted(MonotoneOperator inner,
                                          Eigen::Index extra) {
  require(extra >= 1, ErrorCode::DimensionMismatch, "lifted: extra < 1");
  ConvexSet domain = free_tail(inner.domain(), extra);
  return MonotoneOperator(
      LiftedOp{std::make_shared<const MonotoneOperator>(std::move(inner)), extra},
      std::move(domain));
}

Eigen::Index MonotoneOperator::dim() const { return domain_.dim(); }

const char* MonotoneOperator::variant_name() const {
  if (as<ZeroOp>()) return "zero";
  if (as<LinearOp>()) return "linear";
  if (as<NormalConeOp>()) return "normal_cone_of";
  if (as<SubdiffOp>()) return "subdiff_of";
  if (as<SumOp>()) return "sum";
  return "lifted";
}

ConvexSet evaluate(const MonotoneOperator& A, const Vector& y) {
  require(y.size() == A.dim(), ErrorCode::DimensionMismatch,
          "operator evaluate: dimension mismatch");
  require(A.domain().contains(y), ErrorCode::OutsideDomain,
          "operator evaluate: point outside domain");
  if (const auto* z = A.as<ZeroOp>())
    return ConvexSet::singleton(Vector::Zero(z->dim));
  if (const auto* l = A.as<LinearOp>()) return ConvexSet::singleton(l->M * y);
  if (const auto* n = A.as<NormalConeOp>()) return n->set.normal_cone(y);
  if (const auto* s = A.as<SubdiffOp>())
    return *subdifferential(s->fn, y, SubdiffKind::Clarke);
  if (const auto* sum = A.as<SumOp>()) {
    Vector v = evaluate(*sum->smooth, y).as<Singleton>()->point;
    ConvexSet nc = evaluate(*sum->cone, y);
    if (const auto* pt = nc.as<Singleton>(); pt && pt->point.norm() == 0.0)
      return ConvexSet::singleton(v);
    auto gens = cone_generators(nc);
    require(gens.has_value(), ErrorCode::NotRepresentable,
            "sum value: normal cone has no generator form");
    return ConvexSet::vpolyhedron({v}, std::move(*gens));
  }
  const auto* lf = A.as<LiftedOp>();
  return zero_tail(evaluate(*lf->inner, y.head(lf->inner->dim())), lf->extra);
}

Vector resolvent(const MonotoneOperator& A, double lambda, const Vector& z) {
  require(lambda > 0.0, ErrorCode::SetupViolation, "resolvent: lambda <= 0");
  require(z.size() == A.dim(), ErrorCode::DimensionMismatch,
          "resolvent: dimension mismatch");
  Vector x;
  if (A.as<ZeroOp>()) {
    x = z;
  } else if (const auto* l = A.as<LinearOp>()) {
    const auto n = z.size();
    x = (Matrix::Identity(n, n) + lambda * l->M).partialPivLu().solve(z);
  } else if (const auto* nc = A.as<NormalConeOp>()) {
    x = nc->set.project(z);
  } else if (const auto* s = A.as<SubdiffOp>()) {
    x = prox_minimizer(s->fn, 2.0 * lambda, z);
  } else if (const auto* sum = A.as<SumOp>()) {
    x = solve_sum_resolvent(*sum, lambda, z);
  } else {
    const auto* lf = A.as<LiftedOp>();
    x = z;
    x.head(lf->inner->dim()) =
        resolvent(*lf->inner, lambda, z.head(lf->inner->dim()));
  }

  // inclusion certificate: z - x in lambda * A x
  try {
    ConvexSet lam_Ax = scale_set(evaluate(A, x), lambda);
    double res = lam_Ax.distance(z - x);
    require(res <= 1e-9 * (1.0 + z.norm()), ErrorCode::SolverFailure,
            "resolvent: inclusion residual " + std::to_string(res));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotRepresentable &&
        e.code() != ErrorCode::UnsupportedVariant)
      throw;
  }
  return x;
}

Vector minimal_section(const MonotoneOperator& A, const Vector& y) {
  return evaluate(A, y).project(Vector::Zero(y.size()));
}

Vector project_onto_value(const MonotoneOperator& A, const Vector& y,
                          const Vector& w) {
  return evaluate(A, y).project(w);
}

Vector yosida(const MonotoneOperator& A, double lambda, const Vector& x) {
  return (x - resolvent(A, lambda, x)) / lambda;
}

}  // namespace monoflow
