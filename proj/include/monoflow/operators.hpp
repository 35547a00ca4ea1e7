#pragma once

#include <memory>
#include <variant>

#include "monoflow/functions.hpp"

namespace monoflow {

class MonotoneOperator;

struct ZeroOp {
  Eigen::Index dim;
};

// single-valued x -> Mx with M + M' PSD
struct LinearOp {
  Matrix M;
};

struct NormalConeOp {
  ConvexSet set;
};

struct SubdiffOp {
  FunctionSpec fn;  // convex
};

// single-valued part (Linear or smooth SubdiffOf) plus a normal cone
struct SumOp {
  std::shared_ptr<const MonotoneOperator> smooth;
  std::shared_ptr<const MonotoneOperator> cone;
};

// block operator A x {0}^extra on R^{n+extra}; the resolvent acts on the
// leading block and leaves the tail untouched, which keeps augmented
// trajectories bit-identical on the original coordinates
struct LiftedOp {
  std::shared_ptr<const MonotoneOperator> inner;
  Eigen::Index extra;
};

class MonotoneOperator {
 public:
  using Rep =
      std::variant<ZeroOp, LinearOp, NormalConeOp, SubdiffOp, SumOp, LiftedOp>;

  static MonotoneOperator zero(Eigen::Index dim);
  static MonotoneOperator linear(Matrix M);
  static MonotoneOperator normal_cone_of(ConvexSet set);
  static MonotoneOperator subdiff_of(FunctionSpec fn);
  static MonotoneOperator sum(MonotoneOperator smooth, MonotoneOperator cone);
  static MonotoneOperator lifted(MonotoneOperator inner, Eigen::Index extra);

  Eigen::Index dim() const;
  const ConvexSet& domain() const { return domain_; }
  const Rep& rep() const { return *rep_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(rep_.get());
  }
  const char* variant_name() const;

 private:
  MonotoneOperator(Rep rep, ConvexSet domain);
  std::shared_ptr<const Rep> rep_;
  ConvexSet domain_;
};

// the set Ay; closed convex and nonempty for y in the domain
ConvexSet evaluate(const MonotoneOperator& A, const Vector& y);

// J_lambda(z) = (I + lambda A)^{-1} z, certified against the inclusion
// z - x in lambda A x with residual <= 1e-9
Vector resolvent(const MonotoneOperator& A, double lambda, const Vector& z);

// least-norm element (Ay)^0
Vector minimal_section(const MonotoneOperator& A, const Vector& y);

// pi_{Ay}(w)
Vector project_onto_value(const MonotoneOperator& A, const Vector& y,
                          const Vector& w);

// (x - J_lambda x)/lambda; lies in A(J_lambda x)
Vector yosida(const MonotoneOperator& A, double lambda, const Vector& x);

}  // namespace monoflow
