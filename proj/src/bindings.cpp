#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "monoflow/config.hpp"

namespace py = pybind11;
using namespace monoflow;

PYBIND11_MODULE(_core, m) {
  m.doc() = "monotone evolution inclusions: sets, operators, flows, checks";
  m.attr("__version__") = kToolVersion;

  py::register_exception<Error>(m, "Error");

  py::class_<ConvexSet>(m, "ConvexSet")
      .def_static("whole_space", &ConvexSet::whole_space)
      .def_static("singleton", &ConvexSet::singleton)
      .def_static("polyhedron", &ConvexSet::polyhedron)
      .def_static("ball", &ConvexSet::ball)
      .def_static("box", &ConvexSet::box)
      .def_static("intersection", &ConvexSet::intersection)
      .def_static("cone", &ConvexSet::cone)
      .def_static("vpolyhedron", &ConvexSet::vpolyhedron,
                  py::arg("vertices"), py::arg("rays") = std::vector<Vector>{})
      .def_property_readonly("dim", &ConvexSet::dim)
      .def_property_readonly("kind", &ConvexSet::variant_name)
      .def("contains", &ConvexSet::contains, py::arg("x"),
           py::arg("tol") = 1e-9)
      .def("strictly_contains", &ConvexSet::strictly_contains, py::arg("x"),
           py::arg("margin") = 1e-12)
      .def("project", &ConvexSet::project)
      .def("distance", &ConvexSet::distance)
      .def("normal_cone", &ConvexSet::normal_cone)
      .def("tangent_cone_contains", &ConvexSet::tangent_cone_contains)
      .def("recession_cone", &ConvexSet::recession_cone)
      .def("polar", &ConvexSet::polar)
      .def("support", &ConvexSet::support)
      .def("is_bounded", &ConvexSet::is_bounded)
      .def("__repr__", [](const ConvexSet& s) {
        return std::string("ConvexSet(") + s.variant_name() + ", dim=" +
               std::to_string(s.dim()) + ")";
      });

  py::class_<FunctionSpec>(m, "FunctionSpec")
      .def_static("quadratic", &FunctionSpec::quadratic, py::arg("P"),
                  py::arg("q"), py::arg("c") = 0.0)
      .def_static("affine", &FunctionSpec::affine, py::arg("q"),
                  py::arg("c") = 0.0)
      .def_static("scaled_norm",
                  py::overload_cast<double, int, Eigen::Index>(
                      &FunctionSpec::scaled_norm))
      .def_static("scaled_norm_at",
                  py::overload_cast<double, int, Vector>(
                      &FunctionSpec::scaled_norm))
      .def_static("max_of", &FunctionSpec::max_of)
      .def_static("plus_indicator", &FunctionSpec::plus_indicator)
      .def_static("envelope", &FunctionSpec::envelope)
      .def_static("zero", &FunctionSpec::zero)
      .def_property_readonly("dim", &FunctionSpec::dim)
      .def_property_readonly("kind", &FunctionSpec::variant_name)
      .def("is_convex", &FunctionSpec::is_convex)
      .def("domain", &FunctionSpec::domain)
      .def("__call__",
           [](const FunctionSpec& f, const Vector& x) {
             return evaluate(f, x);
           });

  m.def("subdifferential", &subdifferential);
  m.def("dini_derivative", &dini_derivative);
  m.def("moreau_envelope", &moreau_envelope);
  m.def("prox_point", &prox_point);

  py::class_<MonotoneOperator>(m, "MonotoneOperator")
      .def_static("zero", &MonotoneOperator::zero)
      .def_static("linear", &MonotoneOperator::linear)
      .def_static("normal_cone_of", &MonotoneOperator::normal_cone_of)
      .def_static("subdiff_of", &MonotoneOperator::subdiff_of)
      .def_static("sum", &MonotoneOperator::sum)
      .def_property_readonly("dim", &MonotoneOperator::dim)
      .def_property_readonly("kind", &MonotoneOperator::variant_name)
      .def("domain", &MonotoneOperator::domain)
      .def("evaluate",
           [](const MonotoneOperator& A, const Vector& y) {
             return evaluate(A, y);
           })
      .def("resolvent",
           [](const MonotoneOperator& A, double lam, const Vector& z) {
             return resolvent(A, lam, z);
           })
      .def("minimal_section", [](const MonotoneOperator& A, const Vector& y) {
        return minimal_section(A, y);
      });

  py::class_<Drift>(m, "Drift")
      .def_static("affine", &Drift::affine)
      .def_static("saturated", &Drift::saturated)
      .def_static("tanh_sat", &Drift::tanh_sat)
      .def_property_readonly("dim", &Drift::dim)
      .def("lipschitz", &Drift::lipschitz)
      .def("__call__", &Drift::evaluate);

  py::class_<SystemSpec>(m, "SystemSpec")
      .def_readonly("A", &SystemSpec::A)
      .def_readonly("f", &SystemSpec::f)
      .def_readonly("L_f", &SystemSpec::L_f)
      .def_readonly("interior_nonempty", &SystemSpec::interior_nonempty);

  m.def("make_system", &make_system);
  m.def("right_derivative", &right_derivative);
  m.def("step", &step);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("h", &Trajectory::h)
      .def_readonly("times", &Trajectory::times)
      .def_readonly("states", &Trajectory::states)
      .def_readonly("residuals", &Trajectory::residuals);

  m.def("simulate", &simulate, py::arg("sys"), py::arg("x0"), py::arg("T"),
        py::arg("h"));

  py::class_<LyapunovCandidate>(m, "LyapunovCandidate")
      .def_readonly("V", &LyapunovCandidate::V)
      .def_readonly("W", &LyapunovCandidate::W)
      .def_readonly("a", &LyapunovCandidate::a);

  m.def("make_candidate", &make_candidate, py::arg("V"), py::arg("W"),
        py::arg("a") = 0.0);

  py::class_<CheckReport>(m, "CheckReport")
      .def_readonly("mode", &CheckReport::mode)
      .def_readonly("variant", &CheckReport::variant)
      .def_readonly("n_points", &CheckReport::n_points)
      .def_readonly("worst_margin", &CheckReport::worst_margin)
      .def_readonly("witness", &CheckReport::witness)
      .def_readonly("witness_time", &CheckReport::witness_time)
      .def_readonly("verdict", &CheckReport::verdict)
      .def_readonly("config_hash", &CheckReport::config_hash)
      .def("to_json", [](const CheckReport& r) { return to_json(r); });

  m.def("check_pointwise",
        [](const LyapunovCandidate& cand, const SystemSpec& sys,
           const Vector& y, const std::string& variant) {
          return check_pointwise(cand, sys, y, criterion_from_string(variant));
        });
  m.def("check_trajectory", &check_trajectory);
  m.def(
      "certify",
      [](const LyapunovCandidate& cand, const SystemSpec& sys,
         const ConvexSet& region, int n_samples, const std::string& variant,
         double T, double h, uint64_t seed, uint64_t config_hash) {
        return certify(cand, sys, region, n_samples,
                       criterion_from_string(variant), T, h, seed,
                       config_hash);
      },
      py::arg("candidate"), py::arg("sys"), py::arg("region"),
      py::arg("n_samples"), py::arg("variant"), py::arg("T"), py::arg("h"),
      py::arg("seed") = 0, py::arg("config_hash") = 0);
  m.def("rho_horizon", &rho_horizon);

  py::class_<InvarianceReport>(m, "InvarianceReport")
      .def_readonly("mode", &InvarianceReport::mode)
      .def_readonly("variant", &InvarianceReport::variant)
      .def_readonly("n_points", &InvarianceReport::n_points)
      .def_readonly("worst_margin", &InvarianceReport::worst_margin)
      .def_readonly("witness", &InvarianceReport::witness)
      .def_readonly("verdict", &InvarianceReport::verdict)
      .def_readonly("trajectory_max", &InvarianceReport::trajectory_max)
      .def("to_json", [](const InvarianceReport& r) { return to_json(r); });

  m.def("check_tangent", &check_tangent);
  m.def("check_normal",
        [](const ConvexSet& S, const SystemSpec& sys, const Vector& y,
           const std::string& variant) {
          return check_normal(S, sys, y, normal_variant_from_string(variant));
        });
  m.def("check_trajectory_invariance", &check_trajectory_invariance);
  m.def("check_convexified", &check_convexified);
  m.def(
      "certify_invariance",
      [](const ConvexSet& S, const SystemSpec& sys, int n_samples,
         const std::string& variant, double T, double h, uint64_t seed,
         uint64_t config_hash) {
        return certify_invariance(S, sys, n_samples,
                                  normal_variant_from_string(variant), T, h,
                                  seed, config_hash);
      },
      py::arg("S"), py::arg("sys"), py::arg("n_samples"),
      py::arg("variant") = "min-section", py::arg("T") = 1.0,
      py::arg("h") = 1e-3, py::arg("seed") = 0, py::arg("config_hash") = 0);

  py::class_<LCSSystem>(m, "LCSSystem")
      .def_readonly("A_lin", &LCSSystem::A_lin)
      .def_readonly("B", &LCSSystem::B)
      .def_readonly("C", &LCSSystem::C)
      .def_readonly("D", &LCSSystem::D)
      .def_readonly("x0", &LCSSystem::x0);

  py::class_<LCPSolution>(m, "LCPSolution")
      .def_readonly("u", &LCPSolution::u)
      .def_readonly("w", &LCPSolution::w)
      .def_readonly("res_u", &LCPSolution::res_u)
      .def_readonly("res_w", &LCPSolution::res_w)
      .def_readonly("res_comp", &LCPSolution::res_comp);

  py::class_<LCSTrajectory>(m, "LCSTrajectory")
      .def_readonly("times", &LCSTrajectory::times)
      .def_readonly("states", &LCSTrajectory::states)
      .def_readonly("multipliers", &LCSTrajectory::multipliers)
      .def_readonly("comp_residuals", &LCSTrajectory::comp_residuals);

  m.def("make_lcs", &make_lcs);
  m.def("solve_lcp", &solve_lcp);
  m.def("simulate_lcs", &simulate_lcs);
  m.def("lcs_to_inclusion", &lcs_to_inclusion);
}
