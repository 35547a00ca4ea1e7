#include "monoflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace monoflow {

namespace {

constexpr double kConeTol = 1e-9;     // activity / tangency tolerance
constexpr double kDykstraTol = 1e-12;  // below the 1e-10 idempotence contract
constexpr int kDykstraCap = 10000;
constexpr int kGeneratorCap = 18;
const double kInf = std::numeric_limits<double>::infinity();

double scale_of(const Vector& x) { return 1.0 + x.norm(); }

Vector project_halfspace(const Vector& g, double h, const Vector& x) {
  double gg = g.squaredNorm();
  if (gg == 0.0) return x;
  double viol = g.dot(x) - h;
  if (viol <= 0.0) return x;
  return x - (viol / gg) * g;
}

struct RowForm {
  Matrix G;
  Vector h;
};

// Stack facet rows of a polyhedral set; nullopt when the variant has no
// finite facet description.
std::optional<RowForm> facet_rows(const ConvexSet& s) {
  if (const auto* p = s.as<Polyhedron>()) return RowForm{p->G, p->h};
  if (const auto* b = s.as<Box>()) {
    Eigen::Index n = b->lo.size();
    Matrix G(2 * n, n);
    Vector h(2 * n);
    G.topRows(n) = Matrix::Identity(n, n);
    G.bottomRows(n) = -Matrix::Identity(n, n);
    h.head(n) = b->hi;
    h.tail(n) = -b->lo;
    return RowForm{G, h};
  }
  if (const auto* w = s.as<WholeSpace>()) {
    return RowForm{Matrix::Zero(0, w->dim), Vector::Zero(0)};
  }
  if (const auto* in = s.as<Intersection>()) {
    std::vector<RowForm> parts;
    Eigen::Index rows = 0;
    for (const auto& part : in->parts) {
      auto rf = facet_rows(part);
      if (!rf) return std::nullopt;
      rows += rf->G.rows();
      parts.push_back(std::move(*rf));
    }
    RowForm out{Matrix(rows, s.dim()), Vector(rows)};
    Eigen::Index at = 0;
    for (const auto& rf : parts) {
      out.G.middleRows(at, rf.G.rows()) = rf.G;
      out.h.segment(at, rf.h.size()) = rf.h;
      at += rf.G.rows();
    }
    return out;
  }
  return std::nullopt;
}

std::vector<int> masks_by_popcount(int k) {
  std::vector<int> masks;
  masks.reserve((1 << k) - 1);
  for (int m = 1; m < (1 << k); ++m) masks.push_back(m);
  std::stable_sort(masks.begin(), masks.end(), [](int a, int b) {
    return __builtin_popcount(a) < __builtin_popcount(b);
  });
  return masks;
}

}  // namespace

Vector project_generated(const std::vector<Vector>& vertices,
                         const std::vector<Vector>& rays, const Vector& x) {
  require(!vertices.empty(), ErrorCode::InfeasibleSet,
          "generated set needs at least one vertex");
  const int nv = static_cast<int>(vertices.size());
  const int nr = static_cast<int>(rays.size());
  const int k = nv + nr;
  require(k <= kGeneratorCap, ErrorCode::UnsupportedVariant,
          "generator count exceeds projection cap");

  double gen_scale = scale_of(x);
  for (const auto& v : vertices) gen_scale = std::max(gen_scale, scale_of(v));
  for (const auto& r : rays) gen_scale = std::max(gen_scale, scale_of(r));
  const double cert_tol = 1e-8 * gen_scale;
  const double coef_tol = 1e-9 * gen_scale;

  auto certified = [&](const Vector& p) {
    const Vector d = x - p;
    for (const auto& v : vertices)
      if (d.dot(v - p) > cert_tol) return false;
    for (const auto& r : rays)
      if (d.dot(r) > cert_tol) return false;
    return true;
  };

  for (int mask : masks_by_popcount(k)) {
    int first_vertex = -1;
    for (int i = 0; i < nv; ++i) {
      if (mask & (1 << i)) {
        first_vertex = i;
        break;
      }
    }
    if (first_vertex < 0) continue;  // support must touch conv(vertices)

    std::vector<int> vsel, rsel;
    for (int i = 0; i < nv; ++i)
      if ((mask & (1 << i)) && i != first_vertex) vsel.push_back(i);
    for (int j = 0; j < nr; ++j)
      if (mask & (1 << (nv + j))) rsel.push_back(j);

    const Vector& v0 = vertices[first_vertex];
    const int cols = static_cast<int>(vsel.size() + rsel.size());
    Vector t;
    Vector p;
    if (cols == 0) {
      p = v0;
    } else {
      Matrix B(x.size(), cols);
      int c = 0;
      for (int i : vsel) B.col(c++) = vertices[i] - v0;
      for (int j : rsel) B.col(c++) = rays[j];
      t = B.completeOrthogonalDecomposition().solve(x - v0);
      p = v0 + B * t;
    }

    bool feasible = true;
    double lambda0 = 1.0;
    for (size_t i = 0; i < vsel.size(); ++i) {
      if (t(static_cast<int>(i)) < -coef_tol) feasible = false;
      lambda0 -= t(static_cast<int>(i));
    }
    if (lambda0 < -coef_tol) feasible = false;
    for (size_t j = 0; j < rsel.size(); ++j) {
      if (t(static_cast<int>(vsel.size() + j)) < -coef_tol) feasible = false;
    }
    if (feasible && certified(p)) return p;
  }
  fail(ErrorCode::SolverFailure, "generated-set projection found no certified support");
}

ConvexSet::ConvexSet(Rep rep) : rep_(std::make_shared<const Rep>(std::move(rep))) {}

ConvexSet ConvexSet::whole_space(Eigen::Index dim) {
  require(dim > 0, ErrorCode::DimensionMismatch, "dimension must be positive");
  return ConvexSet(WholeSpace{dim});
}

ConvexSet ConvexSet::singleton(Vector point) {
  require(point.size() > 0, ErrorCode::DimensionMismatch, "empty point");
  return ConvexSet(Singleton{std::move(point)});
}

ConvexSet ConvexSet::polyhedron(Matrix G, Vector h) {
  require(G.rows() == h.size(), ErrorCode::DimensionMismatch,
          "polyhedron rows and offsets disagree");
  require(G.cols() > 0 && G.rows() > 0, ErrorCode::DimensionMismatch,
          "polyhedron needs at least one row and column");
  LinearProgram probe;
  probe.c = Vector::Zero(G.cols());
  probe.A_ub = G;
  probe.b_ub = h;
  probe.A_eq = Matrix::Zero(0, G.cols());
  probe.b_eq = Vector::Zero(0);
  require(solve_lp(probe).status != LpStatus::Infeasible,
          ErrorCode::InfeasibleSet, "polyhedron is empty");
  return ConvexSet(Polyhedron{std::move(G), std::move(h)});
}

ConvexSet ConvexSet::ball(Vector center, double radius) {
  require(center.size() > 0, ErrorCode::DimensionMismatch, "empty center");
  require(radius > 0.0, ErrorCode::InfeasibleSet, "ball radius must be positive");
  return ConvexSet(Ball{std::move(center), radius});
}

ConvexSet ConvexSet::box(Vector lo, Vector hi) {
  require(lo.size() == hi.size() && lo.size() > 0, ErrorCode::DimensionMismatch,
          "box bounds disagree");
  require(lo.allFinite() && hi.allFinite(), ErrorCode::SetupViolation,
          "box bounds must be finite");
  require((lo.array() <= hi.array()).all(), ErrorCode::InfeasibleSet,
          "box has lo > hi");
  return ConvexSet(Box{std::move(lo), std::move(hi)});
}

ConvexSet ConvexSet::cone(Eigen::Index dim, std::vector<Vector> generators) {
  require(dim > 0, ErrorCode::DimensionMismatch, "dimension must be positive");
  for (const auto& g : generators)
    require(g.size() == dim, ErrorCode::DimensionMismatch,
            "generator dimension mismatch");
  return ConvexSet(PolyhedralCone{dim, std::move(generators)});
}

ConvexSet ConvexSet::vpolyhedron(std::vector<Vector> vertices,
                                 std::vector<Vector> rays) {
  require(!vertices.empty(), ErrorCode::InfeasibleSet,
          "vpolyhedron needs at least one vertex");
  Eigen::Index d = vertices.front().size();
  for (const auto& v : vertices)
    require(v.size() == d, ErrorCode::DimensionMismatch, "vertex dim mismatch");
  for (const auto& r : rays)
    require(r.size() == d, ErrorCode::DimensionMismatch, "ray dim mismatch");
  return ConvexSet(VPolyhedron{std::move(vertices), std::move(rays)});
}

ConvexSet ConvexSet::intersection(std::vector<ConvexSet> parts) {
  require(!parts.empty(), ErrorCode::SetupViolation,
          "intersection needs at least one part");
  Eigen::Index d = parts.front().dim();
  for (const auto& p : parts)
    require(p.dim() == d, ErrorCode::DimensionMismatch,
            "intersection dimension mismatch");
  ConvexSet out{Intersection{std::move(parts)}};
  const auto& in = std::get<Intersection>(out.rep());
  if (auto rf = facet_rows(out)) {
    LinearProgram probe;
    probe.c = Vector::Zero(d);
    probe.A_ub = rf->G;
    probe.b_ub = rf->h;
    probe.A_eq = Matrix::Zero(0, d);
    probe.b_eq = Vector::Zero(0);
    require(solve_lp(probe).status != LpStatus::Infeasible,
            ErrorCode::InfeasibleSet, "intersection is empty");
    return out;
  }
  // feasibility probe: alternating projections from the origin
  Vector x = Vector::Zero(d);
  for (int it = 0; it < kDykstraCap; ++it) {
    Vector prev = x;
    for (const auto& p : in.parts) x = p.project(x);
    if ((x - prev).norm() <= kDykstraTol * scale_of(x)) break;
  }
  double worst = 0.0;
  for (const auto& p : in.parts) worst = std::max(worst, p.distance(x));
  require(worst <= 1e-7 * scale_of(x), ErrorCode::InfeasibleSet,
          "intersection feasibility probe failed");
  return out;
}

Eigen::Index ConvexSet::dim() const {
  return std::visit(
      [](const auto& v) -> Eigen::Index {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) return v.dim;
        else if constexpr (std::is_same_v<T, Singleton>) return v.point.size();
        else if constexpr (std::is_same_v<T, Polyhedron>) return v.G.cols();
        else if constexpr (std::is_same_v<T, Ball>) return v.center.size();
        else if constexpr (std::is_same_v<T, Box>) return v.lo.size();
        else if constexpr (std::is_same_v<T, Intersection>)
          return v.parts.front().dim();
        else if constexpr (std::is_same_v<T, PolyhedralCone>) return v.dim;
        else return v.vertices.front().size();
      },
      *rep_);
}

const char* ConvexSet::variant_name() const {
  return std::visit(
      [](const auto& v) -> const char* {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) return "whole_space";
        else if constexpr (std::is_same_v<T, Singleton>) return "singleton";
        else if constexpr (std::is_same_v<T, Polyhedron>) return "polyhedron";
        else if constexpr (std::is_same_v<T, Ball>) return "ball";
        else if constexpr (std::is_same_v<T, Box>) return "box";
        else if constexpr (std::is_same_v<T, Intersection>) return "intersection";
        else if constexpr (std::is_same_v<T, PolyhedralCone>) return "cone";
        else return "vpolyhedron";
      },
      *rep_);
}

bool ConvexSet::contains(const Vector& x, double tol) const {
  require(x.size() == dim(), ErrorCode::DimensionMismatch,
          "point dimension mismatch");
  return std::visit(
      [&](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return true;
        } else if constexpr (std::is_same_v<T, Singleton>) {
          return (x - v.point).norm() <= tol * scale_of(v.point);
        } else if constexpr (std::is_same_v<T, Polyhedron>) {
          for (Eigen::Index i = 0; i < v.G.rows(); ++i) {
            double rn = v.G.row(i).norm();
            if (v.G.row(i).dot(x) > v.h(i) + tol * (1.0 + rn) * scale_of(x))
              return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, Ball>) {
          return (x - v.center).norm() <= v.radius + tol * (1.0 + v.radius);
        } else if constexpr (std::is_same_v<T, Box>) {
          return (x.array() >= v.lo.array() - tol).all() &&
                 (x.array() <= v.hi.array() + tol).all();
        } else if constexpr (std::is_same_v<T, Intersection>) {
          for (const auto& p : v.parts)
            if (!p.contains(x, tol)) return false;
          return true;
        } else {
          return distance(x) <= tol * scale_of(x);
        }
      },
      *rep_);
}

bool ConvexSet::strictly_contains(const Vector& x, double margin) const {
  require(x.size() == dim(), ErrorCode::DimensionMismatch,
          "point dimension mismatch");
  return std::visit(
      [&](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return true;
        } else if constexpr (std::is_same_v<T, Polyhedron>) {
          for (Eigen::Index i = 0; i < v.G.rows(); ++i) {
            double rn = v.G.row(i).norm();
            if (rn == 0.0) continue;
            if (v.G.row(i).dot(x) > v.h(i) - margin * rn) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, Ball>) {
          return (x - v.center).norm() < v.radius - margin;
        } else if constexpr (std::is_same_v<T, Box>) {
          return (x.array() > v.lo.array() + margin).all() &&
                 (x.array() < v.hi.array() - margin).all();
        } else if constexpr (std::is_same_v<T, Intersection>) {
          for (const auto& p : v.parts)
            if (!p.strictly_contains(x, margin)) return false;
          return true;
        } else {
          return false;  // singletons, cones, hulls: no interior claim
        }
      },
      *rep_);
}

bool ConvexSet::contains_ball(const Vector& center, double radius) const {
  require(center.size() == dim(), ErrorCode::DimensionMismatch,
          "point dimension mismatch");
  return std::visit(
      [&](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return true;
        } else if constexpr (std::is_same_v<T, Polyhedron>) {
          for (Eigen::Index i = 0; i < v.G.rows(); ++i) {
            if (v.G.row(i).dot(center) + radius * v.G.row(i).norm() > v.h(i))
              return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, Ball>) {
          return (center - v.center).norm() + radius <= v.radius;
        } else if constexpr (std::is_same_v<T, Box>) {
          return (center.array() - radius >= v.lo.array()).all() &&
                 (center.array() + radius <= v.hi.array()).all();
        } else if constexpr (std::is_same_v<T, Intersection>) {
          for (const auto& p : v.parts)
            if (!p.contains_ball(center, radius)) return false;
          return true;
        } else {
          return false;
        }
      },
      *rep_);
}

Vector ConvexSet::project(const Vector& x) const {
  require(x.size() == dim(), ErrorCode::DimensionMismatch,
          "point dimension mismatch");
  return std::visit(
      [&](const auto& v) -> Vector {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return x;
        } else if constexpr (std::is_same_v<T, Singleton>) {
          return v.point;
        } else if constexpr (std::is_same_v<T, Ball>) {
          Vector d = x - v.center;
          double n = d.norm();
          if (n <= v.radius) return x;
          return v.center + (v.radius / n) * d;
        } else if constexpr (std::is_same_v<T, Box>) {
          return x.cwiseMax(v.lo).cwiseMin(v.hi);
        } else if constexpr (std::is_same_v<T, Polyhedron>) {
          if (contains(x, 1e-14)) return x;
          // Dykstra over the halfspace rows
          const Eigen::Index m = v.G.rows();
          Vector y = x;
          Matrix q = Matrix::Zero(x.size(), m);
          for (int it = 0; it < kDykstraCap; ++it) {
            double sweep = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) {
              Vector w = y + q.col(i);
              Vector yn = project_halfspace(v.G.row(i), v.h(i), w);
              q.col(i) = w - yn;
              sweep = std::max(sweep, (yn - y).norm());
              y = yn;
            }
            if (sweep <= kDykstraTol * scale_of(y) && contains(y, 1e-9))
              return y;
          }
          fail(ErrorCode::NonConvergence, "polyhedron projection did not converge");
        } else if constexpr (std::is_same_v<T, Intersection>) {
          Vector y = x;
          std::vector<Vector> q(v.parts.size(), Vector::Zero(x.size()));
          for (int it = 0; it < kDykstraCap; ++it) {
            double sweep = 0.0;
            for (size_t i = 0; i < v.parts.size(); ++i) {
              Vector w = y + q[i];
              Vector yn = v.parts[i].project(w);
              q[i] = w - yn;
              sweep = std::max(sweep, (yn - y).norm());
              y = yn;
            }
            if (sweep <= kDykstraTol * scale_of(y) && contains(y, 1e-9))
              return y;
          }
          fail(ErrorCode::NonConvergence, "intersection projection did not converge");
        } else if constexpr (std::is_same_v<T, PolyhedralCone>) {
          std::vector<Vector> apex{Vector::Zero(v.dim)};
          return project_generated(apex, v.generators, x);
        } else {
          return project_generated(v.vertices, v.rays, x);
        }
      },
      *rep_);
}

double ConvexSet::distance(const Vector& x) const { return (x - project(x)).norm(); }

ConvexSet ConvexSet::normal_cone(const Vector& x) const {
  require(contains(x, 1e-8), ErrorCode::PointNotInSet,
          "normal cone queried off the set");
  const Eigen::Index n = dim();
  auto zero = [&] { return ConvexSet::singleton(Vector::Zero(n)); };
  return std::visit(
      [&](const auto& v) -> ConvexSet {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return zero();
        } else if constexpr (std::is_same_v<T, Singleton>) {
          std::vector<Vector> gens;
          for (Eigen::Index i = 0; i < n; ++i) {
            gens.push_back(Vector::Unit(n, i));
            gens.push_back(-Vector::Unit(n, i));
          }
          return ConvexSet::cone(n, std::move(gens));
        } else if constexpr (std::is_same_v<T, Polyhedron>) {
          std::vector<Vector> gens;
          for (Eigen::Index i = 0; i < v.G.rows(); ++i) {
            double rn = v.G.row(i).norm();
            if (rn == 0.0) continue;
            if (v.G.row(i).dot(x) >= v.h(i) - kConeTol * rn * scale_of(x))
              gens.push_back(v.G.row(i).transpose());
          }
          if (gens.empty()) return zero();
          return ConvexSet::cone(n, std::move(gens));
        } else if constexpr (std::is_same_v<T, Ball>) {
          Vector d = x - v.center;
          if (d.norm() < v.radius - kConeTol * (1.0 + v.radius)) return zero();
          return ConvexSet::cone(n, {d / d.norm()});
        } else if constexpr (std::is_same_v<T, Box>) {
          std::vector<Vector> gens;
          for (Eigen::Index i = 0; i < n; ++i) {
            double span = 1.0 + v.hi(i) - v.lo(i);
            if (x(i) >= v.hi(i) - kConeTol * span)
              gens.push_back(Vector::Unit(n, i));
            if (x(i) <= v.lo(i) + kConeTol * span)
              gens.push_back(-Vector::Unit(n, i));
          }
          if (gens.empty()) return zero();
          return ConvexSet::cone(n, std::move(gens));
        } else if constexpr (std::is_same_v<T, Intersection>) {
          // sum of the member cones (needs the usual interior-point overlap)
          std::vector<Vector> gens;
          for (const auto& p : v.parts) {
            auto nc = p.normal_cone(x);
            auto part_gens = cone_generators(nc);
            require(part_gens.has_value(), ErrorCode::UnsupportedVariant,
                    "intersection member has no generator-form normal cone");
            gens.insert(gens.end(), part_gens->begin(), part_gens->end());
          }
          if (gens.empty()) return zero();
          return ConvexSet::cone(n, std::move(gens));
        } else if constexpr (std::is_same_v<T, PolyhedralCone>) {
          // polar cone cut down to directions orthogonal to x, in facet form
          Matrix G(v.generators.size() + 2, n);
          Vector h = Vector::Zero(v.generators.size() + 2);
          for (size_t i = 0; i < v.generators.size(); ++i)
            G.row(static_cast<Eigen::Index>(i)) = v.generators[i].transpose();
          G.row(G.rows() - 2) = x.transpose();
          G.row(G.rows() - 1) = -x.transpose();
          return ConvexSet::polyhedron(std::move(G), std::move(h));
        } else {
          fail(ErrorCode::UnsupportedVariant,
               "normal cone of a generator-form polyhedron is not supported");
        }
      },
      *rep_);
}

bool ConvexSet::tangent_cone_contains(const Vector& x, const Vector& d) const {
  require(contains(x, 1e-8), ErrorCode::PointNotInSet,
          "tangent cone queried off the set");
  require(d.size() == dim(), ErrorCode::DimensionMismatch,
          "direction dimension mismatch");
  const double dscale = 1.0 + d.norm();
  return std::visit(
      [&](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return true;
        } else if constexpr (std::is_same_v<T, Singleton>) {
          return d.norm() <= kConeTol * dscale;
        } else if constexpr (std::is_same_v<T, Polyhedron>) {
          for (Eigen::Index i = 0; i < v.G.rows(); ++i) {
            double rn = v.G.row(i).norm();
            if (rn == 0.0) continue;
            bool active =
                v.G.row(i).dot(x) >= v.h(i) - kConeTol * rn * scale_of(x);
            if (active && v.G.row(i).dot(d) > kConeTol * rn * dscale)
              return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, Ball>) {
          Vector u = x - v.center;
          bool active = u.norm() >= v.radius - kConeTol * (1.0 + v.radius);
          return !active || u.dot(d) <= kConeTol * v.radius * dscale;
        } else if constexpr (std::is_same_v<T, Box>) {
          for (Eigen::Index i = 0; i < d.size(); ++i) {
            double span = 1.0 + v.hi(i) - v.lo(i);
            if (x(i) >= v.hi(i) - kConeTol * span && d(i) > kConeTol * dscale)
              return false;
            if (x(i) <= v.lo(i) + kConeTol * span && d(i) < -kConeTol * dscale)
              return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, Intersection>) {
          for (const auto& p : v.parts)
            if (!p.tangent_cone_contains(x, d)) return false;
          return true;
        } else if constexpr (std::is_same_v<T, PolyhedralCone>) {
          // T_K(x) = cl(K + R x) = cone(generators, +x, -x)
          std::vector<Vector> rays = v.generators;
          if (x.norm() > 0) {
            rays.push_back(x);
            rays.push_back(-x);
          }
          std::vector<Vector> apex{Vector::Zero(v.dim)};
          Vector p = project_generated(apex, rays, d);
          return (d - p).norm() <= kConeTol * dscale;
        } else {
          std::vector<Vector> rays = v.rays;
          for (const auto& vert : v.vertices) rays.push_back(vert - x);
          std::vector<Vector> apex{Vector::Zero(x.size())};
          Vector p = project_generated(apex, rays, d);
          return (d - p).norm() <= kConeTol * dscale;
        }
      },
      *rep_);
}

LinearMinimum ConvexSet::linear_minimize(const Vector& c) const {
  require(c.size() == dim(), ErrorCode::DimensionMismatch,
          "objective dimension mismatch");
  return std::visit(
      [&](const auto& v) -> LinearMinimum {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          if (c.norm() > 0)
            fail(ErrorCode::Unbounded, "linear objective unbounded on the whole space");
          return {0.0, Vector::Zero(v.dim)};
        } else if constexpr (std::is_same_v<T, Singleton>) {
          return {c.dot(v.point), v.point};
        } else if constexpr (std::is_same_v<T, Ball>) {
          double cn = c.norm();
          if (cn == 0.0) {
            Vector p = v.center;
            p(0) -= v.radius;  // lexicographically smallest point of the ball
            return {0.0, p};
          }
          Vector arg = v.center - (v.radius / cn) * c;
          return {c.dot(arg), arg};
        } else if constexpr (std::is_same_v<T, Box>) {
          Vector arg(v.lo.size());
          for (Eigen::Index i = 0; i < v.lo.size(); ++i)
            arg(i) = c(i) > 0 ? v.lo(i) : (c(i) < 0 ? v.hi(i) : v.lo(i));
          return {c.dot(arg), arg};
        } else if constexpr (std::is_same_v<T, PolyhedralCone>) {
          for (const auto& g : v.generators) {
            if (c.dot(g) < -kConeTol * scale_of(g) * (1.0 + c.norm()))
              fail(ErrorCode::Unbounded, "linear objective unbounded on the cone");
          }
          return {0.0, Vector::Zero(v.dim)};
        } else if constexpr (std::is_same_v<T, VPolyhedron>) {
          for (const auto& r : v.rays) {
            if (c.dot(r) < -kConeTol * scale_of(r) * (1.0 + c.norm()))
              fail(ErrorCode::Unbounded, "linear objective unbounded along a ray");
          }
          const Vector* best = nullptr;
          double bestval = kInf;
          for (const auto& vert : v.vertices) {
            double val = c.dot(vert);
            if (val < bestval - 1e-12 * (1.0 + std::abs(bestval))) {
              bestval = val;
              best = &vert;
            } else if (best && val <= bestval + 1e-12 * (1.0 + std::abs(bestval))) {
              // lexicographic tie-break among tied vertices
              for (Eigen::Index i = 0; i < vert.size(); ++i) {
                if (vert(i) < (*best)(i) - 1e-12) {
                  best = &vert;
                  break;
                }
                if (vert(i) > (*best)(i) + 1e-12) break;
              }
            }
          }
          return {bestval, *best};
        } else {
          auto rf = facet_rows(*this);
          require(rf.has_value(), ErrorCode::UnsupportedVariant,
                  "linear_minimize needs a facet description");
          LinearProgram lp;
          lp.c = c;
          lp.A_ub = rf->G;
          lp.b_ub = rf->h;
          lp.A_eq = Matrix::Zero(0, dim());
          lp.b_eq = Vector::Zero(0);
          LpSolution sol = solve_lp_lexico(lp);
          if (sol.status == LpStatus::Unbounded)
            fail(ErrorCode::Unbounded, "linear objective unbounded on the polyhedron");
          require(sol.status == LpStatus::Optimal, ErrorCode::SolverFailure,
                  "linear_minimize solve failed");
          return {sol.value, sol.x};
        }
      },
      *rep_);
}

ConvexSet ConvexSet::recession_cone() const {
  const Eigen::Index n = dim();
  return std::visit(
      [&](const auto& v) -> ConvexSet {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return *this;
        } else if constexpr (std::is_same_v<T, Polyhedron>) {
          return ConvexSet::polyhedron(v.G, Vector::Zero(v.G.rows()));
        } else if constexpr (std::is_same_v<T, PolyhedralCone>) {
          return *this;
        } else if constexpr (std::is_same_v<T, VPolyhedron>) {
          return ConvexSet::cone(n, v.rays);
        } else if constexpr (std::is_same_v<T, Intersection>) {
          fail(ErrorCode::UnsupportedVariant,
               "recession cone of an intersection is not supported");
        } else {
          return ConvexSet::singleton(Vector::Zero(n));  // bounded variants
        }
      },
      *rep_);
}

ConvexSet ConvexSet::polar() const {
  const Eigen::Index n = dim();
  return std::visit(
      [&](const auto& v) -> ConvexSet {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return ConvexSet::singleton(Vector::Zero(n));
        } else if constexpr (std::is_same_v<T, Singleton>) {
          if (v.point.norm() == 0.0) return ConvexSet::whole_space(n);
          Matrix G(1, n);
          G.row(0) = v.point.transpose();
          return ConvexSet::polyhedron(G, Vector::Ones(1));
        } else if constexpr (std::is_same_v<T, Ball>) {
          require(v.center.norm() <= 1e-14, ErrorCode::UnsupportedVariant,
                  "polar of an off-center ball is not supported");
          return ConvexSet::ball(Vector::Zero(n), 1.0 / v.radius);
        } else if constexpr (std::is_same_v<T, PolyhedralCone>) {
          if (v.generators.empty())
            return ConvexSet::whole_space(n);
          Matrix G(v.generators.size(), n);
          for (size_t i = 0; i < v.generators.size(); ++i)
            G.row(static_cast<Eigen::Index>(i)) = v.generators[i].transpose();
          return ConvexSet::polyhedron(std::move(G),
                                       Vector::Zero(G.rows()));
        } else if constexpr (std::is_same_v<T, VPolyhedron>) {
          Matrix G(v.vertices.size() + v.rays.size(), n);
          Vector h(G.rows());
          Eigen::Index r = 0;
          for (const auto& vert : v.vertices) {
            G.row(r) = vert.transpose();
            h(r++) = 1.0;
          }
          for (const auto& ray : v.rays) {
            G.row(r) = ray.transpose();
            h(r++) = 0.0;
          }
          return ConvexSet::polyhedron(std::move(G), std::move(h));
        } else if constexpr (std::is_same_v<T, Box>) {
          require(n <= 16, ErrorCode::UnsupportedVariant,
                  "box polar corner enumeration capped at dim 16");
          Eigen::Index rows = Eigen::Index(1) << n;
          Matrix G(rows, n);
          for (Eigen::Index mask = 0; mask < rows; ++mask)
            for (Eigen::Index i = 0; i < n; ++i)
              G(mask, i) = (mask >> i) & 1 ? v.hi(i) : v.lo(i);
          return ConvexSet::polyhedron(std::move(G), Vector::Ones(rows));
        } else {
          fail(ErrorCode::UnsupportedVariant,
               "polar is not supported for this variant");
        }
      },
      *rep_);
}

double ConvexSet::support(const Vector& d) const {
  require(d.size() == dim(), ErrorCode::DimensionMismatch,
          "direction dimension mismatch");
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return d.norm() == 0.0 ? 0.0 : kInf;
        } else if constexpr (std::is_same_v<T, Singleton>) {
          return d.dot(v.point);
        } else if constexpr (std::is_same_v<T, Ball>) {
          return d.dot(v.center) + v.radius * d.norm();
        } else if constexpr (std::is_same_v<T, Box>) {
          double s = 0;
          for (Eigen::Index i = 0; i < d.size(); ++i)
            s += std::max(d(i) * v.lo(i), d(i) * v.hi(i));
          return s;
        } else if constexpr (std::is_same_v<T, PolyhedralCone>) {
          for (const auto& g : v.generators)
            if (d.dot(g) > kConeTol * scale_of(g) * (1.0 + d.norm()))
              return kInf;
          return 0.0;
        } else if constexpr (std::is_same_v<T, VPolyhedron>) {
          for (const auto& r : v.rays)
            if (d.dot(r) > kConeTol * scale_of(r) * (1.0 + d.norm()))
              return kInf;
          double s = -kInf;
          for (const auto& vert : v.vertices) s = std::max(s, d.dot(vert));
          return s;
        } else {
          try {
            return -linear_minimize(-d).value;
          } catch (const Error& e) {
            if (e.code() == ErrorCode::Unbounded) return kInf;
            throw;
          }
        }
      },
      *rep_);
}

bool ConvexSet::is_bounded() const {
  const Eigen::Index n = dim();
  return std::visit(
      [&](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return false;
        } else if constexpr (std::is_same_v<T, Singleton> ||
                             std::is_same_v<T, Ball> || std::is_same_v<T, Box>) {
          return true;
        } else if constexpr (std::is_same_v<T, PolyhedralCone>) {
          for (const auto& g : v.generators)
            if (g.norm() > 1e-12) return false;
          return true;
        } else if constexpr (std::is_same_v<T, VPolyhedron>) {
          for (const auto& r : v.rays)
            if (r.norm() > 1e-12) return false;
          return true;
        } else if constexpr (std::is_same_v<T, Intersection>) {
          for (const auto& p : v.parts)
            if (p.is_bounded()) return true;  // sufficient, not necessary
          auto rf = facet_rows(*this);
          if (!rf) return false;
          for (Eigen::Index i = 0; i < n; ++i) {
            if (support(Vector::Unit(n, i)) == kInf) return false;
            if (support(-Vector::Unit(n, i)) == kInf) return false;
          }
          return true;
        } else {
          for (Eigen::Index i = 0; i < n; ++i) {
            if (support(Vector::Unit(n, i)) == kInf) return false;
            if (support(-Vector::Unit(n, i)) == kInf) return false;
          }
          return true;
        }
      },
      *rep_);
}

std::optional<std::vector<Vector>> cone_generators(const ConvexSet& s) {
  if (const auto* c = s.as<PolyhedralCone>()) return c->generators;
  if (const auto* p = s.as<Singleton>()) {
    if (p->point.norm() <= 1e-14) return std::vector<Vector>{};
  }
  return std::nullopt;
}

GeneratorForm generator_form(const ConvexSet& s) {
  if (const auto* p = s.as<Singleton>()) return {{p->point}, {}};
  if (const auto* b = s.as<Box>()) {
    const auto n = b->lo.size();
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
      if (b->hi(i) - b->lo(i) > 1e-14) free.push_back(i);
    require(free.size() <= 12, ErrorCode::NotRepresentable,
            "box vertex enumeration beyond desk scale");
    std::vector<Vector> verts;
    verts.reserve(size_t{1} << free.size());
    for (size_t mask = 0; mask < (size_t{1} << free.size()); ++mask) {
      Vector v = b->lo;
      for (size_t j = 0; j < free.size(); ++j)
        if (mask & (size_t{1} << j)) v(free[j]) = b->hi(free[j]);
      verts.push_back(std::move(v));
    }
    return {std::move(verts), {}};
  }
  if (const auto* v = s.as<VPolyhedron>()) return {v->vertices, v->rays};
  if (const auto* c = s.as<PolyhedralCone>())
    return {{Vector::Zero(c->dim)}, c->generators};
  fail(ErrorCode::NotRepresentable,
       std::string("no generator form for ") + s.variant_name());
}

bool rint_contains(const ConvexSet& S, const Vector& y) {
  if (!S.contains(y)) return false;
  if (S.as<WholeSpace>() || S.as<Singleton>()) return true;
  if (S.strictly_contains(y, 1e-12)) return true;
  if (const auto* b = S.as<Ball>()) return b->radius <= 1e-15;
  if (const auto* b = S.as<Box>()) {
    for (Eigen::Index i = 0; i < b->lo.size(); ++i) {
      if (b->hi(i) - b->lo(i) <= 1e-14) continue;
      if (y(i) - b->lo(i) <= 1e-12 || b->hi(i) - y(i) <= 1e-12) return false;
    }
    return true;
  }
  if (const auto* p = S.as<Polyhedron>()) {
    for (Eigen::Index i = 0; i < p->G.rows(); ++i) {
      if (p->G.row(i).dot(y) < p->h(i) - 1e-9) continue;
      try {
        if (S.linear_minimize(p->G.row(i).transpose()).value <
            p->h(i) - 1e-9)
          return false;  // a genuinely one-sided active row
      } catch (const Error&) {
        return false;  // unbounded below: the row is one-sided
      }
    }
    return true;
  }
  if (const auto* I = S.as<Intersection>()) {
    for (const auto& part : I->parts)
      if (!rint_contains(part, y)) return false;
    return true;
  }
  return false;
}

std::pair<Vector, Vector> bounding_box(const ConvexSet& S) {
  const auto n = S.dim();
  Vector lo(n), hi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      lo(i) = S.linear_minimize(Vector::Unit(n, i)).value;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unbounded) throw;
      lo(i) = -8.0;
    }
    try {
      hi(i) = -S.linear_minimize(-Vector::Unit(n, i)).value;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unbounded) throw;
      hi(i) = 8.0;
    }
  }
  return {lo, hi};
}

}  // namespace monoflow
