#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "monoflow/geometry.hpp"

namespace monoflow {

class FunctionSpec;

enum class SubdiffKind { Proximal, Frechet, Limiting, Clarke, Horizontal };

// 1/2 x'Px + q'x + c, P symmetric (PSD or indefinite)
struct Quadratic {
  Matrix P;
  Vector q;
  double c;
};

struct AffineFn {
  Vector q;
  double c;
};

// weight * ||x - center||_p, p in {1,2}.  Signed weights are allowed so
// downward kinks (empty proximal subdifferential) are expressible.
struct ScaledNorm {
  double weight;
  int p;
  Vector center;
};

// pointwise max of Quadratic/AffineFn pieces
struct MaxOf {
  std::vector<FunctionSpec> pieces;
};

// base + indicator of domain; base must be finite-valued
struct PlusIndicator {
  std::shared_ptr<const FunctionSpec> base;
  ConvexSet domain;
};

// Moreau envelope with the 1/delta weight:
//   y -> inf_z { base(z) + (1/delta) ||y - z||^2 }
// Nested envelopes are flattened at construction (weights add).
struct Envelope {
  std::shared_ptr<const FunctionSpec> base;
  double delta;
};

class FunctionSpec {
 public:
  using Rep = std::variant<Quadratic, AffineFn, ScaledNorm, MaxOf,
                           PlusIndicator, Envelope>;

  static FunctionSpec quadratic(Matrix P, Vector q, double c = 0.0);
  static FunctionSpec affine(Vector q, double c = 0.0);
  static FunctionSpec scaled_norm(double weight, int p, Eigen::Index dim);
  static FunctionSpec scaled_norm(double weight, int p, Vector center);
  static FunctionSpec max_of(std::vector<FunctionSpec> pieces);
  static FunctionSpec plus_indicator(FunctionSpec base, ConvexSet domain);
  static FunctionSpec envelope(FunctionSpec base, double delta);
  static FunctionSpec zero(Eigen::Index dim);

  Eigen::Index dim() const;
  const Rep& rep() const { return *rep_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(rep_.get());
  }
  const char* variant_name() const;

  // derived at construction: false as soon as any piece is nonconvex
  bool is_convex() const { return convex_; }
  // effective domain (whole space unless an indicator is present)
  ConvexSet domain() const;

 private:
  FunctionSpec(Rep rep, bool convex);
  std::shared_ptr<const Rep> rep_;
  bool convex_;
};

// +inf exactly when x is outside the effective domain
double evaluate(const FunctionSpec& f, const Vector& x);

// nullopt encodes the empty subdifferential (possible for Proximal/Frechet
// at downward kinks).  Nonconvex limiting sets are returned as their convex
// hull, which is what every downstream criterion consumes.
std::optional<ConvexSet> subdifferential(const FunctionSpec& f,
                                         const Vector& x, SubdiffKind kind);

// lower Dini directional derivative (liminf over t->0+, w->v); +inf when v
// exits the effective domain
double dini_derivative(const FunctionSpec& f, const Vector& x,
                       const Vector& v);

// sampled liminf estimate over dyadic steps; cross-check only
double dini_derivative_numeric(const FunctionSpec& f, const Vector& x,
                               const Vector& v);

// envelope as a first-class catalog member
FunctionSpec moreau_envelope(const FunctionSpec& f, double delta);

// argmin_z { f(z) + (1/delta)||z - y||^2 }, certified against the
// optimality inclusion 2(y - z*)/delta in subdifferential(f, z*)
Vector prox_point(const FunctionSpec& f, double delta, const Vector& y);

// same minimizer without the bounded-below precondition; the quadratic
// coupling keeps the subproblem well posed for any convex f.  This is the
// entry point resolvents use.
Vector prox_minimizer(const FunctionSpec& f, double delta, const Vector& y);

// Lipschitz-regularized lower approximation: Envelope(W, 1/k)
FunctionSpec regularize_W(const FunctionSpec& w, int k);

}  // namespace monoflow
