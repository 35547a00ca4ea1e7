#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "monoflow/integrator.hpp"

namespace monoflow {

// pointwise dual criteria; labels track the proposition items
enum class CriterionVariant { i, ii, iv, v, vi };

const char* to_string(CriterionVariant v);
CriterionVariant criterion_from_string(const std::string& s);

struct LyapunovCandidate {
  FunctionSpec V;
  FunctionSpec W;  // nonnegative running cost
  double a;        // nonnegative decay weight
};

// validates a >= 0 and W >= 0 on a deterministic sample cloud
LyapunovCandidate make_candidate(FunctionSpec V, FunctionSpec W, double a);

struct CheckReport {
  std::string mode;     // "pointwise" or "trajectory"
  std::string variant;  // "i", "ii", "iv", "v", "vi", or "trajectory"
  int n_points = 0;
  double worst_margin = 0.0;  // signed; <= tolerance means pass
  Vector witness;             // point of the worst margin
  double witness_time = 0.0;  // grid time of the worst trajectory violation
  std::string verdict;  // Certified-on-samples | Refuted | Inconclusive
  double tol_abs = 0.0;
  double tol_rel = 0.0;
  double tol_traj = 0.0;
  uint64_t config_hash = 0;
  // bookkeeping beyond the serialized schema
  int n_empty = 0;             // samples with empty proximal subdifferential
  bool consistency_ok = true;  // no pointwise-pass/trajectory-fail sample
};

// exactly the schema keys {mode, variant, n_points, worst_margin, witness,
// verdict, tolerances, config_hash}; deterministic rendering
std::string to_json(const CheckReport& r);

// pass threshold for pointwise margins at a point with value Vy
double margin_tolerance(double Vy);

// signed criterion margin at y; -inf encodes an empty proximal
// subdifferential (vacuously satisfied, reported by certify)
double check_pointwise(const LyapunovCandidate& cand, const SystemSpec& sys,
                       const Vector& y, CriterionVariant variant);

// max over grid times of e^{a t}V(x_k) + trapezoid-int W - V(y);
// pass iff <= 10 h (1 + |V(y)|)
double check_trajectory(const LyapunovCandidate& cand, const SystemSpec& sys,
                        const Vector& y, double T, double h);

CheckReport certify(const LyapunovCandidate& cand, const SystemSpec& sys,
                    const ConvexSet& region, int n_samples,
                    CriterionVariant variant, double T, double h,
                    uint64_t seed = 0, uint64_t config_hash = 0);

// trajectory-only report over the same sample cloud
CheckReport certify_trajectory(const LyapunovCandidate& cand,
                               const SystemSpec& sys, const ConvexSet& region,
                               int n_samples, double T, double h,
                               uint64_t seed = 0, uint64_t config_hash = 0);

// (psi1 + b/a) e^{a(t-t1)} - b/a; the comparison bound for psi' <= a psi + b
double gronwall_bound(double a, double b, double psi1, double t1, double t);

// sampled psi stays below the bound anchored at the first sample, tol 1e-6
bool verify_gronwall(const std::vector<double>& times,
                     const std::vector<double>& psi, double a, double b);

// sup of horizons nu over a 32-value logarithmic rho grid such that
// B_rho(y) stays admissible and both proximity conditions hold on [0, nu];
// +inf at equilibria with vanishing weight terms, 0 when no rho works
double rho_horizon(const LyapunovCandidate& cand, const SystemSpec& sys,
                   const Vector& y, double rho_bar, double lambda_bar,
                   double h);

// sampled necessary check of liminf_{Dom A -> y} V = V(y) on dyadic shells
bool check_regularity(const FunctionSpec& V, const MonotoneOperator& A,
                      const Vector& y, int n_samples);

// (A x {0}^2, (f, W, 0)): running cost and a frozen scalar ride along
SystemSpec augment(const SystemSpec& sys, const LyapunovCandidate& cand);

// reference value (x(t;y), int_0^t W + alpha, gamma) built from the base
// system at the same step size
Vector closed_form_z(const SystemSpec& sys, const LyapunovCandidate& cand,
                     double t, const Vector& y, double alpha, double gamma,
                     double h);

}  // namespace monoflow
