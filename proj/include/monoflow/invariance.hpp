#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "monoflow/integrator.hpp"

namespace monoflow {

// normal-cone criterion flavor: direction from the minimal section of the
// image, or the infimum over the whole image
enum class NormalVariant { MinSection, SetMin };

const char* to_string(NormalVariant v);
NormalVariant normal_variant_from_string(const std::string& s);

// f(y) - pi_{Ay}(f(y)) lies in the tangent cone of S restricted to the
// operator domain closure
bool check_tangent(const ConvexSet& S, const SystemSpec& sys, const Vector& y);

// max over unit-normalized proximal normal generators xi of <xi, d>;
// pass iff <= 1e-9.  An interior point has no generators and scores 0.
double check_normal(const ConvexSet& S, const SystemSpec& sys, const Vector& y,
                    NormalVariant variant);

// max over grid times of distance(S, x_k); pass iff <= 10 h (1 + ||y||)
double check_trajectory_invariance(const ConvexSet& S, const SystemSpec& sys,
                                   const Vector& y, double T, double h);

// does some v in the image Ay put f(y) - v inside the tangent cone: a
// feasibility LP over the generator form of Ay.  Polyhedral S only; the
// base point may sit on the domain boundary (constraint absorption).
bool check_convexified(const ConvexSet& S, const SystemSpec& sys,
                       const Vector& y);

struct InvarianceReport {
  std::string mode;     // "invariance"
  std::string variant;  // "min-section" or "set-min"
  int n_points = 0;
  double worst_margin = 0.0;  // signed; <= tolerance means pass
  Vector witness;             // point of the worst margin or first violation
  double witness_time = 0.0;  // grid time of the worst trajectory escape
  std::string verdict;        // Certified-on-samples | Refuted
  double tol_abs = 0.0;
  double tol_rel = 0.0;
  double tol_traj = 0.0;
  uint64_t config_hash = 0;
  // bookkeeping beyond the serialized schema
  std::vector<double> margins;     // per-sample normal margins
  std::vector<bool> tangent_pass;  // per-sample tangent verdicts
  bool polarity_ok = true;         // tangent and normal verdicts agree
  double trajectory_max = 0.0;     // worst grid distance over the starts
  bool closure_evidence_ok = true;  // sampled closure-condition probe
};

// exactly the report schema keys {mode, variant, n_points, worst_margin,
// witness, verdict, tolerances, config_hash}; deterministic rendering
std::string to_json(const InvarianceReport& r);

// samples S restricted to the domain interior, scores every point with the
// normal criterion and the tangent test, and drives trajectories from the
// first starts; any positive margin or escaping trajectory refutes
InvarianceReport certify_invariance(const ConvexSet& S, const SystemSpec& sys,
                                    int n_samples, NormalVariant variant,
                                    double T, double h, uint64_t seed = 0,
                                    uint64_t config_hash = 0);

}  // namespace monoflow
