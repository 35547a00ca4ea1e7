#pragma once

#include <iosfwd>
#include <memory>
#include <variant>
#include <vector>

#include "monoflow/operators.hpp"

namespace monoflow {

class Drift;

// f(x) = Fx + b
struct AffineDrift {
  Matrix F;
  Vector b;
};

// componentwise clamp or smooth saturation of an affine field; both
// compositions are 1-Lipschitz, so L_f stays the norm of F
struct SaturatedDrift {
  Matrix F;
  Vector b;
  double level;
  bool use_tanh;
};

// (f(x), W(x), 0) on two extra coordinates; pairs with the lifted operator
struct AugmentedDrift {
  std::shared_ptr<const Drift> base;
  FunctionSpec W;
  double w_lip;  // sampled Lipschitz estimate for W
};

class Drift {
 public:
  using Rep = std::variant<AffineDrift, SaturatedDrift, AugmentedDrift>;

  static Drift affine(Matrix F, Vector b);
  static Drift saturated(Matrix F, Vector b, double level);
  static Drift tanh_sat(Matrix F, Vector b, double level);
  static Drift augmented(Drift base, FunctionSpec W);

  Vector evaluate(const Vector& x) const;
  double lipschitz() const;
  Eigen::Index dim() const;
  const Rep& rep() const { return *rep_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(rep_.get());
  }

 private:
  explicit Drift(Rep rep);
  std::shared_ptr<const Rep> rep_;
};

struct SystemSpec {
  MonotoneOperator A;
  Drift f;
  double L_f;
  bool interior_nonempty;  // sampled standing-assumption flag
};

SystemSpec make_system(MonotoneOperator A, Drift f);

struct Trajectory {
  double h = 0.0;
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> residuals;          // inclusion residual per step
  std::vector<Vector> right_derivatives;  // (x_{k+1} - x_k)/h per step
};

// f(y) - pi_{Ay}(f(y)): the initial right velocity of the strong solution
Vector right_derivative(const SystemSpec& sys, const Vector& y);

// one semi-implicit step x+ = J_{hA}(x + h f(x))
Vector step(const SystemSpec& sys, const Vector& x, double h);

Trajectory simulate(const SystemSpec& sys, const Vector& x0, double T,
                    double h);

// || x(s; x(t;x0)) - x(s+t; x0) ||, restart vs continuation
double check_semigroup(const SystemSpec& sys, const Vector& x0, double s,
                       double t, double h);

struct FlowEstimate {
  double lhs;  // ||x(t;x0) - x(t;y0)||
  double rhs;  // e^{L_f t} ||x0 - y0||
};
FlowEstimate check_nonexpansive(const SystemSpec& sys, const Vector& x0,
                                const Vector& y0, double t, double h);

struct LocalBound {
  double M;            // max sampled ||(f(z) - Az)^0||
  double worst_ratio;  // discrete right-derivative norm / (e^{L_f} M)
};
LocalBound local_bound_probe(const SystemSpec& sys, const Vector& ybar,
                             double rho, int samples);

// header "t,x_1..x_n,residual", one row per state, 17 significant digits
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace monoflow
