"""Monotone evolution inclusions: sets, operators, flows, and checks.

Thin re-export of the compiled core plus a dict-level report helper.
"""

import json as _json

from ._core import (
    CheckReport,
    ConvexSet,
    Drift,
    Error,
    FunctionSpec,
    InvarianceReport,
    LCPSolution,
    LCSSystem,
    LCSTrajectory,
    LyapunovCandidate,
    MonotoneOperator,
    SystemSpec,
    Trajectory,
    __version__,
    certify,
    certify_invariance,
    check_convexified,
    check_normal,
    check_pointwise,
    check_tangent,
    check_trajectory,
    check_trajectory_invariance,
    dini_derivative,
    lcs_to_inclusion,
    make_candidate,
    make_lcs,
    make_system,
    moreau_envelope,
    prox_point,
    right_derivative,
    simulate,
    simulate_lcs,
    solve_lcp,
    step,
    subdifferential,
)

__all__ = [
    "CheckReport",
    "ConvexSet",
    "Drift",
    "Error",
    "FunctionSpec",
    "InvarianceReport",
    "LCPSolution",
    "LCSSystem",
    "LCSTrajectory",
    "LyapunovCandidate",
    "MonotoneOperator",
    "SystemSpec",
    "Trajectory",
    "__version__",
    "certify",
    "certify_invariance",
    "check_convexified",
    "check_normal",
    "check_pointwise",
    "check_tangent",
    "check_trajectory",
    "check_trajectory_invariance",
    "dini_derivative",
    "lcs_to_inclusion",
    "make_candidate",
    "make_lcs",
    "make_system",
    "moreau_envelope",
    "prox_point",
    "report_dict",
    "right_derivative",
    "simulate",
    "simulate_lcs",
    "solve_lcp",
    "step",
    "subdifferential",
]


def report_dict(report):
    """Schema-locked JSON form of a check report, as a Python dict."""
    return _json.loads(report.to_json())
