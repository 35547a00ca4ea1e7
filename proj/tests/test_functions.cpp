#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "doctest.h"
#include "monoflow/functions.hpp"
#include "oracles.hpp"

using namespace monoflow;

namespace {

Vector vec1(double x) {
  Vector v(1);
  v(0) = x;
  return v;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

FunctionSpec abs1d() { return FunctionSpec::scaled_norm(1.0, 1, 1); }

FunctionSpec half_sq(Eigen::Index n) {
  return FunctionSpec::quadratic(Matrix::Identity(n, n), Vector::Zero(n));
}

// scalar grid minimization of V(z) + (1/delta)(y-z)^2
double envelope_grid_oracle(const FunctionSpec& V, double delta, double y,
                            double* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  double bz = 0.0;
  for (int i = -40000; i <= 40000; ++i) {
    double z = i / 4000.0;
    double val = evaluate(V, vec1(z)) + (y - z) * (y - z) / delta;
    if (val < best) {
      best = val;
      bz = z;
    }
  }
  if (argmin) *argmin = bz;
  return best;
}

}  // namespace

TEST_CASE("evaluate on the catalog") {
  CHECK(evaluate(half_sq(1), vec1(3.0)) == doctest::Approx(4.5));
  auto m = FunctionSpec::max_of(
      {FunctionSpec::affine(vec1(1.0)), FunctionSpec::affine(vec1(-1.0))});
  CHECK(evaluate(m, vec1(-2.0)) == doctest::Approx(2.0));
  auto f = FunctionSpec::plus_indicator(
      FunctionSpec::zero(1), ConvexSet::box(vec1(0.0), vec1(1.0)));
  CHECK(std::isinf(evaluate(f, vec1(2.0))));
  CHECK(evaluate(f, vec1(0.5)) == 0.0);
  auto sn = FunctionSpec::scaled_norm(2.0, 2, vec({1, 1}));
  CHECK(evaluate(sn, vec({4, 5})) == doctest::Approx(10.0));
}

TEST_CASE("subdifferential examples") {
  auto s = subdifferential(abs1d(), vec1(0.0), SubdiffKind::Proximal);
  REQUIRE(s.has_value());
  REQUIRE(s->as<Box>() != nullptr);
  CHECK(s->as<Box>()->lo(0) == doctest::Approx(-1.0));
  CHECK(s->as<Box>()->hi(0) == doctest::Approx(1.0));

  auto neg = FunctionSpec::scaled_norm(-1.0, 1, 1);
  CHECK_FALSE(subdifferential(neg, vec1(0.0), SubdiffKind::Proximal).has_value());
  CHECK_FALSE(subdifferential(neg, vec1(0.0), SubdiffKind::Frechet).has_value());
  auto cl = subdifferential(neg, vec1(0.0), SubdiffKind::Clarke);
  REQUIRE(cl.has_value());
  CHECK(cl->contains(vec1(0.7)));
  CHECK_FALSE(cl->contains(vec1(1.2)));

  Matrix G(1, 1);
  G << -1;
  auto halfline = ConvexSet::polyhedron(G, Vector::Zero(1));
  auto con = FunctionSpec::plus_indicator(half_sq(1), halfline);
  auto sub = subdifferential(con, vec1(0.0), SubdiffKind::Proximal);
  REQUIRE(sub.has_value());
  CHECK(sub->contains(vec1(-5.0)));
  CHECK(sub->contains(vec1(0.0)));
  CHECK_FALSE(sub->contains(vec1(0.1)));

  auto hz = subdifferential(abs1d(), vec1(0.0), SubdiffKind::Horizontal);
  REQUIRE(hz.has_value());
  REQUIRE(hz->as<Singleton>() != nullptr);
  CHECK(hz->as<Singleton>()->point.norm() == 0.0);

  auto hz2 = subdifferential(con, vec1(0.0), SubdiffKind::Horizontal);
  REQUIRE(hz2.has_value());
  CHECK(hz2->contains(vec1(-3.0)));
  CHECK_FALSE(hz2->contains(vec1(1.0)));
}

TEST_CASE("subdifferential off the kink and at shifted centers") {
  auto s = subdifferential(abs1d(), vec1(2.0), SubdiffKind::Proximal);
  REQUIRE(s->as<Singleton>() != nullptr);
  CHECK(s->as<Singleton>()->point(0) == doctest::Approx(1.0));

  auto shifted = FunctionSpec::scaled_norm(-1.0, 1, vec1(1.0));
  CHECK_FALSE(subdifferential(shifted, vec1(1.0), SubdiffKind::Proximal).has_value());
  auto smooth = subdifferential(shifted, vec1(3.0), SubdiffKind::Proximal);
  REQUIRE(smooth->as<Singleton>() != nullptr);
  CHECK(smooth->as<Singleton>()->point(0) == doctest::Approx(-1.0));

  auto e2 = FunctionSpec::scaled_norm(-2.0, 2, vec({0, 0}));
  CHECK_FALSE(subdifferential(e2, vec({0, 0}), SubdiffKind::Frechet).has_value());
  auto ecl = subdifferential(e2, vec({0, 0}), SubdiffKind::Clarke);
  REQUIRE(ecl->as<Ball>() != nullptr);
  CHECK(ecl->as<Ball>()->radius == doctest::Approx(2.0));
}

TEST_CASE("dini derivative examples") {
  CHECK(dini_derivative(abs1d(), vec1(0.0), vec1(1.0)) == doctest::Approx(1.0));
  CHECK(dini_derivative(abs1d(), vec1(0.0), vec1(-1.0)) == doctest::Approx(1.0));
  auto neg = FunctionSpec::scaled_norm(-1.0, 1, 1);
  CHECK(dini_derivative(neg, vec1(0.0), vec1(1.0)) == doctest::Approx(-1.0));
  CHECK(dini_derivative(half_sq(1), vec1(2.0), vec1(-1.0)) == doctest::Approx(-2.0));

  // exiting the indicator domain costs +inf
  auto con = FunctionSpec::plus_indicator(
      FunctionSpec::zero(1), ConvexSet::box(vec1(0.0), vec1(1.0)));
  CHECK(std::isinf(dini_derivative(con, vec1(1.0), vec1(1.0))));
  CHECK(dini_derivative(con, vec1(1.0), vec1(-1.0)) == 0.0);
}

TEST_CASE("dini numeric cross-check, nonconvex max") {
  Matrix mP(1, 1);
  mP << -1.0;
  auto f = FunctionSpec::max_of({FunctionSpec::quadratic(mP, Vector::Zero(1)),
                                 FunctionSpec::affine(vec1(-1.0), -0.5)});
  CHECK_FALSE(f.is_convex());
  auto g = oracles::rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    Vector x = oracles::random_vector(g, 1, -2, 2);
    Vector v = oracles::random_vector(g, 1, -1, 1);
    double a = dini_derivative(f, x, v);
    double b = dini_derivative_numeric(f, x, v);
    CHECK(std::abs(a - b) <= 2e-3 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("moreau envelope examples") {
  Vector p = prox_point(abs1d(), 1.0, vec1(1.0));
  CHECK(p(0) == doctest::Approx(0.5));
  auto env = moreau_envelope(abs1d(), 1.0);
  CHECK(evaluate(env, vec1(1.0)) == doctest::Approx(0.75));
  double arg = 0.0;
  double oracle = envelope_grid_oracle(abs1d(), 1.0, 1.0, &arg);
  CHECK(evaluate(env, vec1(1.0)) == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(p(0) == doctest::Approx(arg).epsilon(1e-2));

  CHECK(evaluate(env, vec1(0.0)) == doctest::Approx(0.0));
  CHECK(prox_point(abs1d(), 1.0, vec1(0.0))(0) == doctest::Approx(0.0));

  auto q = half_sq(1);
  CHECK(prox_point(q, 2.0, vec1(2.0))(0) == doctest::Approx(1.0));
  CHECK(evaluate(moreau_envelope(q, 2.0), vec1(2.0)) == doctest::Approx(1.0));
  CHECK(evaluate(moreau_envelope(q, 2.0), vec1(2.0)) ==
        doctest::Approx(envelope_grid_oracle(q, 2.0, 2.0)).epsilon(1e-6));
}

TEST_CASE("envelope monotonicity and domination") {
  auto g = oracles::rng(9);
  auto V = abs1d();
  for (int trial = 0; trial < 50; ++trial) {
    double y = oracles::random_vector(g, 1, -3, 3)(0);
    double v1 = evaluate(moreau_envelope(V, 0.5), vec1(y));
    double v2 = evaluate(moreau_envelope(V, 1.0), vec1(y));
    double v3 = evaluate(moreau_envelope(V, 2.0), vec1(y));
    double vv = evaluate(V, vec1(y));
    CHECK(v1 <= vv + 1e-12);
    CHECK(v2 <= v1 + 1e-12);
    CHECK(v3 <= v2 + 1e-12);
  }
  // V_{1/k} increases to V at continuity points
  double y = 1.3;
  double prev = -1e30;
  for (int k = 1; k <= 64; k *= 2) {
    double vk = evaluate(regularize_W(V, k), vec1(y));
    CHECK(vk >= prev - 1e-12);
    prev = vk;
  }
  CHECK(std::abs(prev - evaluate(V, vec1(y))) < 0.05);
}

TEST_CASE("regularized W sequence") {
  CHECK(evaluate(regularize_W(abs1d(), 1), vec1(1.0)) == doctest::Approx(0.75));
  for (int k : {1, 3, 10})
    CHECK(evaluate(regularize_W(abs1d(), k), vec1(0.0)) == doctest::Approx(0.0));
  auto W = half_sq(1);
  auto g = oracles::rng(13);
  for (int i = 0; i < 100; ++i) {
    double y = oracles::random_vector(g, 1, -4, 4)(0);
    double w1 = evaluate(regularize_W(W, 1), vec1(y));
    double w2 = evaluate(regularize_W(W, 2), vec1(y));
    double wv = evaluate(W, vec1(y));
    CHECK(w1 <= w2 + 1e-12);
    CHECK(w2 <= wv + 1e-12);
  }
}

TEST_CASE("prox of max-of in two dimensions") {
  // f = max(.5||z||^2, z_1): kink surface crossed by the prox path
  auto f = FunctionSpec::max_of(
      {half_sq(2), FunctionSpec::affine(vec({1, 0}), 0.0)});
  auto g = oracles::rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    Vector y = oracles::random_vector(g, 2, -2, 2);
    double delta = 0.3 + trial * 0.1;
    Vector z = prox_point(f, delta, y);
    double fz = evaluate(f, z) + (y - z).squaredNorm() / delta;
    // local grid probe around z confirms optimality
    for (int a = -3; a <= 3; ++a)
      for (int b = -3; b <= 3; ++b) {
        Vector u = z + vec({a * 0.01, b * 0.01});
        CHECK(evaluate(f, u) + (y - u).squaredNorm() / delta >= fz - 1e-9);
      }
  }
}

TEST_CASE("constrained prox (indicator sums)") {
  // |z| restricted to [0.25, 2], scalar grid oracle
  auto base = abs1d();
  auto f = FunctionSpec::plus_indicator(base, ConvexSet::box(vec1(0.25), vec1(2.0)));
  for (double y : {-1.0, 0.3, 0.6, 1.5, 3.0}) {
    Vector z = prox_point(f, 1.0, vec1(y));
    double best = 1e30;
    double bz = 0;
    for (int i = 0; i <= 7000; ++i) {
      double zz = 0.25 + i * (2.0 - 0.25) / 7000.0;
      double val = std::abs(zz) + (y - zz) * (y - zz);
      if (val < best) {
        best = val;
        bz = zz;
      }
    }
    CHECK(z(0) == doctest::Approx(bz).epsilon(1e-3));
  }

  // anisotropic quadratic over a box exercises the splitting path
  Matrix P(2, 2);
  P << 3, 1, 1, 1;
  auto q2 = FunctionSpec::quadratic(P, vec({-1, 0}));
  auto fc = FunctionSpec::plus_indicator(q2, ConvexSet::box(vec({0, 0}), vec({1, 1})));
  Vector y = vec({2, -1});
  Vector z = prox_point(fc, 1.0, y);
  double fz = evaluate(fc, z) + (y - z).squaredNorm();
  for (int a = 0; a <= 60; ++a)
    for (int b = 0; b <= 60; ++b) {
      Vector u = vec({a / 60.0, b / 60.0});
      CHECK(evaluate(fc, u) + (y - u).squaredNorm() >= fz - 1e-7);
    }
}

TEST_CASE("nested envelopes flatten") {
  auto e1 = FunctionSpec::envelope(abs1d(), 1.0);
  auto e2 = FunctionSpec::envelope(e1, 1.0);
  auto flat = FunctionSpec::envelope(abs1d(), 2.0);
  for (double y : {-2.0, -0.3, 0.0, 0.7, 1.9})
    CHECK(evaluate(e2, vec1(y)) == doctest::Approx(evaluate(flat, vec1(y))));
  // prox of an envelope function (composition formula)
  Vector z = prox_point(e1, 1.0, vec1(2.0));
  double best = 1e30, bz = 0;
  for (int i = -4000; i <= 4000; ++i) {
    double zz = i / 1000.0;
    double val = evaluate(e1, vec1(zz)) + (2.0 - zz) * (2.0 - zz);
    if (val < best) {
      best = val;
      bz = zz;
    }
  }
  CHECK(z(0) == doctest::Approx(bz).epsilon(1e-2));
}

TEST_CASE("subdifferential nesting on random instances") {
  auto g = oracles::rng(29);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    int n = 1 + trial % 3;
    FunctionSpec f = [&]() -> FunctionSpec {
      switch (trial % 4) {
        case 0:
          return FunctionSpec::quadratic(oracles::random_psd(g, n),
                                         oracles::random_vector(g, n));
        case 1:
          return FunctionSpec::scaled_norm(trial % 8 < 4 ? 1.5 : -1.5,
                                           1 + trial % 2,
                                           oracles::random_vector(g, n));
        case 2: {
          std::vector<FunctionSpec> pieces;
          for (int i = 0; i < 3; ++i)
            pieces.push_back(FunctionSpec::affine(oracles::random_vector(g, n),
                                                  oracles::random_vector(g, 1)(0)));
          return FunctionSpec::max_of(pieces);
        }
        default:
          return FunctionSpec::envelope(
              FunctionSpec::scaled_norm(1.0, 2, oracles::random_vector(g, n)),
              0.7);
      }
    }();
    Vector x = trial % 5 == 0 ? Vector(Vector::Zero(n))
                              : Vector(oracles::random_vector(g, n, -1, 1));
    auto prox_sd = subdifferential(f, x, SubdiffKind::Proximal);
    auto clarke = subdifferential(f, x, SubdiffKind::Clarke);
    REQUIRE(clarke.has_value());
    if (!prox_sd) continue;
    ++checked;
    // containment via representative points of the proximal set
    std::vector<Vector> reps;
    if (const auto* s = prox_sd->as<Singleton>()) reps.push_back(s->point);
    if (const auto* b = prox_sd->as<Box>()) {
      reps.push_back(b->lo);
      reps.push_back(b->hi);
      reps.push_back(0.5 * (b->lo + b->hi));
    }
    if (const auto* v = prox_sd->as<VPolyhedron>())
      reps = v->vertices;
    if (const auto* bl = prox_sd->as<Ball>()) {
      reps.push_back(bl->center);
      Vector e = Vector::Zero(n);
      e(0) = bl->radius;
      reps.push_back(bl->center + e);
    }
    for (const auto& r : reps) CHECK(clarke->contains(r, 1e-8));
  }
  CHECK(checked > 40);
}

TEST_CASE("convex dini equals support of subdifferential") {
  auto g = oracles::rng(31);
  std::vector<FunctionSpec> fs;
  fs.push_back(abs1d());
  fs.push_back(half_sq(2));
  fs.push_back(FunctionSpec::scaled_norm(2.0, 2, vec({1, -1})));
  fs.push_back(FunctionSpec::max_of(
      {FunctionSpec::affine(vec({1, 1}), 0.0), FunctionSpec::affine(vec({-1, 0}), 0.0)}));
  for (const auto& f : fs) {
    const auto n = f.dim();
    for (int trial = 0; trial < 30; ++trial) {
      Vector x = trial == 0 ? Vector(Vector::Zero(n))
                            : Vector(oracles::random_vector(g, static_cast<int>(n), -2, 2));
      Vector v = oracles::random_vector(g, static_cast<int>(n), -1, 1);
      auto sd = subdifferential(f, x, SubdiffKind::Clarke);
      REQUIRE(sd.has_value());
      CHECK(dini_derivative(f, x, v) ==
            doctest::Approx(sd->support(v)).epsilon(1e-6));
    }
  }
}

TEST_CASE("smooth members match finite differences") {
  auto g = oracles::rng(37);
  auto q = FunctionSpec::quadratic(oracles::random_psd(g, 3),
                                   oracles::random_vector(g, 3), 0.4);
  auto env = FunctionSpec::envelope(FunctionSpec::scaled_norm(1.0, 2, 3), 0.9);
  for (const auto& f : {q, env}) {
    for (int trial = 0; trial < 20; ++trial) {
      Vector x = oracles::random_vector(g, 3, -2, 2);
      if (f.as<Envelope>() && x.norm() < 0.5) continue;  // keep away from kink image
      auto sd = subdifferential(f, x, SubdiffKind::Proximal);
      REQUIRE(sd->as<Singleton>() != nullptr);
      Vector grad = sd->as<Singleton>()->point;
      const double h = 1e-6;
      for (Eigen::Index i = 0; i < 3; ++i) {
        Vector e = Vector::Zero(3);
        e(i) = h;
        double fd = (evaluate(f, x + e) - evaluate(f, x - e)) / (2 * h);
        CHECK(std::abs(fd - grad(i)) < 1e-5 * (1.0 + std::abs(grad(i))));
      }
    }
  }
}

TEST_CASE("construction and precondition errors") {
  Matrix A(2, 2);
  A << 1, 2, 0, 1;
  CHECK_THROWS_AS((void)FunctionSpec::quadratic(A, Vector::Zero(2)), Error);

  Matrix mN(1, 1);
  mN << -1;
  auto noncvx = FunctionSpec::quadratic(mN, Vector::Zero(1));
  CHECK_FALSE(noncvx.is_convex());
  CHECK_THROWS_AS((void)FunctionSpec::envelope(noncvx, 1.0), Error);
  CHECK_THROWS_AS((void)prox_point(noncvx, 1.0, vec1(0.0)), Error);

  CHECK_THROWS_AS((void)FunctionSpec::envelope(FunctionSpec::affine(vec1(1.0)), 1.0),
                  Error);
  try {
    (void)FunctionSpec::envelope(FunctionSpec::affine(vec1(1.0)), 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnboundedBelow);
  }

  CHECK_THROWS_AS((void)regularize_W(FunctionSpec::affine(Vector::Zero(1), -1.0), 2),
                  Error);
  try {
    (void)regularize_W(FunctionSpec::affine(Vector::Zero(1), -1.0), 2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotNonnegative);
  }

  CHECK_THROWS_AS((void)FunctionSpec::max_of({}), Error);
  CHECK_THROWS_AS(
      (void)FunctionSpec::max_of({FunctionSpec::scaled_norm(1.0, 1, 1)}), Error);
  CHECK_THROWS_AS((void)FunctionSpec::scaled_norm(1.0, 3, 2), Error);

  auto con = FunctionSpec::plus_indicator(
      FunctionSpec::zero(1), ConvexSet::box(vec1(0.0), vec1(1.0)));
  CHECK_THROWS_AS((void)subdifferential(con, vec1(2.0), SubdiffKind::Proximal),
                  Error);
  CHECK_THROWS_AS(
      (void)FunctionSpec::plus_indicator(con, ConvexSet::box(vec1(0.0), vec1(1.0))),
      Error);
}

TEST_CASE("effective domain") {
  auto con = FunctionSpec::plus_indicator(
      half_sq(2), ConvexSet::box(vec({0, 0}), vec({1, 1})));
  CHECK(con.domain().contains(vec({0.5, 0.5})));
  CHECK_FALSE(con.domain().contains(vec({2, 0})));
  CHECK(half_sq(2).domain().as<WholeSpace>() != nullptr);
}
