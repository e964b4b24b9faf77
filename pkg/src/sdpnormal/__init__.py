"""Detect and certify bad behavior of semidefinite systems ``sum x_i A_i ⪯ B``.

Typical use::

    from sdpnormal import SemidefSystem, verdict
    v = verdict(SemidefSystem.from_data(A, B))
    v.behavior, v.certificate
"""

from .closedness import LinearMapOnSym, image_closedness, is_feasible_direction, is_weakly_infeasible
from .facial import (
    dual_value_on_minimal_face,
    max_rank_slack,
    normalize_assumption1,
    solve_on_minimal_face,
    verify_max_rank,
)
from .linalg import Mode
from .normal_forms import (
    bad_objective,
    complete_dual_solution,
    to_bad_normal_form,
    to_good_normal_form,
    verify_bad_normal_form,
    verify_good_normal_form,
)
from .pathology import Behavior, verdict
from .sdp import SdpProblem, SolverConfig, Status, solve
from .system import ReformTrace, SemidefSystem, apply_trace, invert_trace, record

__version__ = "0.1.0"

__all__ = [
    "Behavior", "LinearMapOnSym", "dual_value_on_minimal_face", "solve_on_minimal_face", "Mode", "ReformTrace", "SdpProblem", "SemidefSystem",
    "SolverConfig", "Status", "apply_trace", "bad_objective", "complete_dual_solution",
    "image_closedness", "invert_trace", "is_feasible_direction", "is_weakly_infeasible",
    "max_rank_slack", "normalize_assumption1", "record", "solve", "to_bad_normal_form",
    "to_good_normal_form", "verdict", "verify_bad_normal_form", "verify_good_normal_form",
    "verify_max_rank",
]
