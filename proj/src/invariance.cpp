#include "monoflow/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <utility>

#include "json.hpp"
#include "monoflow/lp.hpp"
#include "monoflow/sampling.hpp"

namespace monoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTolAbs = 1e-9;

// the candidate set cut down to the operator domain closure
ConvexSet restricted(const ConvexSet& S, const SystemSpec& sys) {
  ConvexSet dom = sys.A.domain();
  if (dom.as<WholeSpace>()) return S;
  return ConvexSet::intersection({S, std::move(dom)});
}

void require_base_point(const ConvexSet& S, const SystemSpec& sys,
                        const Vector& y) {
  require(S.contains(y), ErrorCode::PointNotInSet,
          "base point outside the candidate set");
  require(rint_contains(sys.A.domain(), y), ErrorCode::NotInterior,
          "base point not interior to the operator domain");
}

// facet rows (G, h) of a polyhedral set; nullopt when some member has no
// facet form (balls and generator-form polyhedra)
std::optional<std::pair<Matrix, Vector>> poly_rows(const ConvexSet& s) {
  const auto n = s.dim();
  if (s.as<WholeSpace>())
    return std::make_pair(Matrix::Zero(0, n), Vector::Zero(0));
  if (const auto* p = s.as<Polyhedron>()) return std::make_pair(p->G, p->h);
  if (const auto* p = s.as<Singleton>()) {
    Matrix G(2 * n, n);
    G << Matrix::Identity(n, n), -Matrix::Identity(n, n);
    Vector h(2 * n);
    h << p->point, -p->point;
    return std::make_pair(std::move(G), std::move(h));
  }
  if (const auto* b = s.as<Box>()) {
    std::vector<std::pair<Vector, double>> rows;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::isfinite(b->hi(i))) rows.emplace_back(Vector::Unit(n, i), b->hi(i));
      if (std::isfinite(b->lo(i))) rows.emplace_back(-Vector::Unit(n, i), -b->lo(i));
    }
    Matrix G(static_cast<Eigen::Index>(rows.size()), n);
    Vector h(G.rows());
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
      G.row(i) = rows[static_cast<size_t>(i)].first.transpose();
      h(i) = rows[static_cast<size_t>(i)].second;
    }
    return std::make_pair(std::move(G), std::move(h));
  }
  if (const auto* I = s.as<Intersection>()) {
    Matrix G(0, n);
    Vector h(0);
    for (const auto& part : I->parts) {
      auto rows = poly_rows(part);
      if (!rows) return std::nullopt;
      Matrix G2(G.rows() + rows->first.rows(), n);
      G2 << G, rows->first;
      Vector h2(h.size() + rows->second.size());
      h2 << h, rows->second;
      G = std::move(G2);
      h = std::move(h2);
    }
    return std::make_pair(std::move(G), std::move(h));
  }
  return std::nullopt;
}

std::vector<Vector> sample_region(const ConvexSet& S, const ConvexSet& domA,
                                  int n, uint64_t seed) {
  auto [lo, hi] = bounding_box(
      domA.as<WholeSpace>()
          ? S
          : ConvexSet::intersection({S, domA}));
  LowDiscrepancy seq(static_cast<int>(S.dim()), seed);
  std::vector<Vector> out;
  const int attempts = std::max(512, 64 * n);
  for (int k = 0; k < attempts && static_cast<int>(out.size()) < n; ++k) {
    Vector u = seq.next();
    Vector x = lo.array() + u.array() * (hi - lo).array();
    if (!S.contains(x)) continue;
    if (!rint_contains(domA, x)) continue;
    out.push_back(std::move(x));
  }
  require(!out.empty(), ErrorCode::EmptySampleSet,
          "no sample point of the candidate set inside the domain interior");
  return out;
}

}  // namespace

const char* to_string(NormalVariant v) {
  return v == NormalVariant::MinSection ? "min-section" : "set-min";
}

NormalVariant normal_variant_from_string(const std::string& s) {
  if (s == "min-section") return NormalVariant::MinSection;
  if (s == "set-min") return NormalVariant::SetMin;
  fail(ErrorCode::SetupViolation, "unknown normal variant: " + s);
}

bool check_tangent(const ConvexSet& S, const SystemSpec& sys,
                   const Vector& y) {
  require_base_point(S, sys, y);
  return restricted(S, sys).tangent_cone_contains(y, right_derivative(sys, y));
}

double check_normal(const ConvexSet& S, const SystemSpec& sys, const Vector& y,
                    NormalVariant variant) {
  require_base_point(S, sys, y);
  auto gens = cone_generators(restricted(S, sys).normal_cone(y));
  require(gens.has_value(), ErrorCode::NotRepresentable,
          "normal cone without a generator form");

  double margin = -kInf;
  bool scored = false;
  if (variant == NormalVariant::MinSection) {
    const Vector d = right_derivative(sys, y);
    for (const auto& g : *gens) {
      if (g.norm() <= 1e-15) continue;
      margin = std::max(margin, g.dot(d) / g.norm());
      scored = true;
    }
  } else {
    const Vector fy = sys.f.evaluate(y);
    ConvexSet Ay = evaluate(sys.A, y);
    for (const auto& g : *gens) {
      if (g.norm() <= 1e-15) continue;
      Vector u = g / g.norm();
      margin = std::max(margin, u.dot(fy) - Ay.support(u));
      scored = true;
    }
  }
  return scored ? margin : 0.0;  // interior point: nothing to separate
}

double check_trajectory_invariance(const ConvexSet& S, const SystemSpec& sys,
                                   const Vector& y, double T, double h) {
  require(S.contains(y), ErrorCode::PointNotInSet,
          "base point outside the candidate set");
  auto traj = simulate(sys, y, T, h);
  double worst = 0.0;
  for (const auto& x : traj.states) worst = std::max(worst, S.distance(x));
  return worst;
}

bool check_convexified(const ConvexSet& S, const SystemSpec& sys,
                       const Vector& y) {
  require(S.contains(y), ErrorCode::PointNotInSet,
          "base point outside the candidate set");
  // boundary base points are admitted: absorption of the drift by the
  // normal cone is exactly the boundary phenomenon this test is for
  require(sys.A.domain().contains(y), ErrorCode::OutsideDomain,
          "base point outside the operator domain");
  ConvexSet SD = restricted(S, sys);
  auto rows = poly_rows(SD);
  require(rows.has_value(), ErrorCode::UnsupportedVariant,
          "convexified test needs a polyhedral candidate set");
  const Vector fy = sys.f.evaluate(y);
  ConvexSet Ay = evaluate(sys.A, y);
  if (const auto* v = Ay.as<Singleton>())
    return SD.tangent_cone_contains(y, fy - v->point);

  const auto& [G, hvec] = *rows;
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    double rn = G.row(i).norm();
    if (rn == 0.0) continue;
    if (G.row(i).dot(y) >= hvec(i) - 1e-9 * rn * (1.0 + y.norm()))
      active.push_back(i);
  }
  auto gen = generator_form(Ay);
  const auto K = static_cast<Eigen::Index>(gen.vertices.size());
  const auto J = static_cast<Eigen::Index>(gen.rays.size());
  // feasibility only: active rows applied to fy - V mu - R lambda, with mu
  // on the simplex and lambda >= 0
  LinearProgram lp;
  lp.c = Vector::Zero(K + J);
  lp.A_ub = Matrix::Zero(static_cast<Eigen::Index>(active.size()) + K + J,
                         K + J);
  lp.b_ub = Vector::Zero(lp.A_ub.rows());
  Eigen::Index row = 0;
  for (auto i : active) {
    for (Eigen::Index k = 0; k < K; ++k)
      lp.A_ub(row, k) = -G.row(i).dot(gen.vertices[static_cast<size_t>(k)]);
    for (Eigen::Index j = 0; j < J; ++j)
      lp.A_ub(row, K + j) = -G.row(i).dot(gen.rays[static_cast<size_t>(j)]);
    lp.b_ub(row) = -G.row(i).dot(fy);
    ++row;
  }
  for (Eigen::Index k = 0; k < K + J; ++k) lp.A_ub(row++, k) = -1.0;
  lp.A_eq = Matrix::Zero(1, K + J);
  lp.A_eq.block(0, 0, 1, K).setOnes();
  lp.b_eq = Vector::Ones(1);
  return solve_lp(lp).status == LpStatus::Optimal;
}

InvarianceReport certify_invariance(const ConvexSet& S, const SystemSpec& sys,
                                    int n_samples, NormalVariant variant,
                                    double T, double h, uint64_t seed,
                                    uint64_t config_hash) {
  require(n_samples > 0, ErrorCode::SetupViolation, "certify: n_samples <= 0");
  const ConvexSet dom = sys.A.domain();
  auto points = sample_region(S, dom, n_samples, seed);

  InvarianceReport rep;
  rep.mode = "invariance";
  rep.variant = to_string(variant);
  rep.n_points = static_cast<int>(points.size());
  rep.tol_abs = kTolAbs;
  rep.tol_rel = 0.0;
  rep.tol_traj = 10.0 * h;  // scaled per start by (1 + ||y||)
  rep.config_hash = config_hash;
  rep.worst_margin = -kInf;
  rep.witness = points.front();

  bool refuted = false;
  Vector refutation_witness = points.front();
  double refutation_time = 0.0;
  for (const auto& y : points) {
    double margin = check_normal(S, sys, y, variant);
    bool point_pass = !(margin > kTolAbs);
    bool tangent = check_tangent(S, sys, y);
    rep.margins.push_back(margin);
    rep.tangent_pass.push_back(tangent);
    if (tangent != point_pass) rep.polarity_ok = false;
    if (margin > rep.worst_margin) {
      rep.worst_margin = margin;
      rep.witness = y;
    }
    if (!point_pass && !refuted) {
      refuted = true;
      refutation_witness = y;
    }
  }

  const int starts = std::min(20, static_cast<int>(points.size()));
  for (int i = 0; i < starts; ++i) {
    const Vector& y = points[static_cast<size_t>(i)];
    auto traj = simulate(sys, y, T, h);
    double worst = 0.0;
    double t_at = 0.0;
    for (size_t k = 0; k < traj.states.size(); ++k) {
      double d = S.distance(traj.states[k]);
      if (d > worst) {
        worst = d;
        t_at = traj.times[k];
      }
    }
    rep.trajectory_max = std::max(rep.trajectory_max, worst);
    if (worst > 10.0 * h * (1.0 + y.norm()) && !refuted) {
      refuted = true;
      refutation_witness = y;
      refutation_time = t_at;
    }
  }

  // sampled evidence for the closure condition: points of the restricted
  // set slide into the domain interior along a segment to a witness point
  {
    ConvexSet SD = restricted(S, sys);
    auto [lo, hi] = bounding_box(SD);
    LowDiscrepancy seq(static_cast<int>(S.dim()),
                       seed ^ 0x9e3779b97f4a7c15ull);
    const Vector& anchor = points.front();
    int found = 0;
    for (int k = 0; k < 256 && found < 16; ++k) {
      Vector u = seq.next();
      Vector x = lo.array() + u.array() * (hi - lo).array();
      if (!S.contains(x) || !dom.contains(x)) continue;
      ++found;
      bool reachable = false;
      for (double t : {1e-3, 0.5}) {
        Vector z = x + t * (anchor - x);
        if (S.contains(z) && rint_contains(dom, z)) {
          reachable = true;
          break;
        }
      }
      if (!reachable) rep.closure_evidence_ok = false;
    }
  }

  if (refuted) {
    rep.verdict = "Refuted";
    rep.witness = refutation_witness;
    rep.witness_time = refutation_time;
  } else {
    rep.verdict = "Certified-on-samples";
  }
  return rep;
}

std::string to_json(const InvarianceReport& r) {
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

}  // namespace monoflow
