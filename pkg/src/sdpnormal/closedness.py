"""Closedness of linear images of the PSD cone and related membership tests.

A map ``Y -> (A_1 . Y, ..., A_m . Y)`` has a closed image exactly when the
homogeneous system ``sum x_i A_i ⪯ 0`` is well behaved. When it is badly
behaved, the bad normal form yields a vector in the frontier
``closure(image) minus image``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .errors import DimensionMismatch, InfeasibleSystem
from .facial import SlackResult, dual_as_system, max_rank_slack
from .linalg import Mode
from .normal_forms import (
    BadNormalForm,
    GoodNormalForm,
    to_bad_normal_form,
    to_good_normal_form,
)
from .pathology import Verdict, verdict
from .system import ReformTrace, SemidefSystem, variable_map


class Closedness(str, enum.Enum):
    CLOSED = "closed"
    NOT_CLOSED = "not_closed"


class Direction(str, enum.Enum):
    IN_DIR = "in_dir"
    IN_CLOSURE_NOT_DIR = "in_closure_not_dir"
    NOT_IN_CLOSURE = "not_in_closure"


@dataclass(frozen=True)
class LinearMapOnSym:
    A: tuple

    def __post_init__(self):
        mats = tuple(self.A)
        if not mats:
            raise DimensionMismatch("a map needs at least one matrix")
        la.same_mode(*mats)
        n = mats[0].shape[0]
        if any(a.shape != (n, n) for a in mats):
            raise DimensionMismatch("all matrices of a map must share one size")
        object.__setattr__(self, "A", tuple(la.frozen(a) for a in mats))

    @classmethod
    def from_data(cls, mats, mode: Mode | None = None):
        mode = mode or la.infer_mode([mats])
        return cls(tuple(la.sym(a, mode) for a in mats))

    @property
    def mode(self) -> Mode:
        return la.mode_of(self.A[0])

    @property
    def n(self) -> int:
        return self.A[0].shape[0]

    @property
    def m(self) -> int:
        return len(self.A)

    def __call__(self, Y):
        return np.array([la.bullet(a, Y) for a in self.A], dtype=self.A[0].dtype)

    def homogeneous_system(self) -> SemidefSystem:
        return SemidefSystem(self.A, la.zeros((self.n, self.n), self.mode))


@dataclass(frozen=True)
class FrontierWitness:
    """``c`` in the frontier of the image, with the data that proves it.

    ``c_normal`` is the same functional on the normal-form variables, i.e. a
    frontier point of the reformulated map. ``weak`` re-derives membership
    through the dual/alternative-system characterization.
    """

    c: np.ndarray
    c_normal: np.ndarray
    weak: "WeakInfeasibility"


@dataclass(frozen=True)
class ClosednessResult:
    status: Closedness
    verdict: Verdict
    normal_form: object
    witness: FrontierWitness | None = None

    @property
    def closed(self) -> bool:
        return self.status == Closedness.CLOSED


def _as_map(map_or_mats) -> LinearMapOnSym:
    if isinstance(map_or_mats, LinearMapOnSym):
        return map_or_mats
    return LinearMapOnSym.from_data(map_or_mats)


def image_closedness(map_or_mats, trace: ReformTrace | None = None, cfg=None) -> ClosednessResult:
    """Decide closedness of the image of the PSD cone under the map.

    ``trace`` (steps on the normalized homogeneous system) fixes the normal
    form used for the witness; otherwise the built-in recipe is used.
    """
    amap = _as_map(map_or_mats)
    sys = amap.homogeneous_system()
    v = verdict(sys, cfg)
    x_Z = v.slack.x_Z
    if not v.bad:
        nf = to_good_normal_form(v.normalized, v.certificate, x_Z, trace)
        return ClosednessResult(Closedness.CLOSED, v, nf)
    nf = to_bad_normal_form(v.normalized, v.certificate, x_Z, trace)
    c_nf = frontier_objective(nf)
    L, _ = variable_map(nf.trace, amap.m, amap.mode)
    # c_nf^T x_nf == c^T x_src with x_src = L x_nf + d  =>  c = L^{-T} c_nf
    c = la.inverse(L).T @ c_nf
    if amap.mode == Mode.EXACT:
        c = la.primitive_scale(c)
    weak = is_weakly_infeasible(amap, c, cfg)
    return ClosednessResult(Closedness.NOT_CLOSED, v, nf, FrontierWitness(la.frozen(c), la.frozen(c_nf), weak))


def frontier_objective(nf: BadNormalForm) -> np.ndarray:
    """``±e_m`` on normal-form variables, a frontier point of the reformulated map.

    Every feasible point has ``x_m = 0``, so both signs give optimum 0; the
    dual is infeasible for ``-e_m`` since ``H_m ⪰ 0``, and for ``+e_m`` as
    well when ``H_m = 0``. The positive sign is used whenever it is valid.
    """
    m, mode = nf.system.m, nf.system.mode
    c = la.zeros(m, mode)
    c[m - 1] = la.one(mode) if la.is_zero(nf.H(m - 1)) else -la.one(mode)
    return c


# ---------------------------------------------------------------- weak infeasibility


@dataclass(frozen=True)
class WeakInfeasibility:
    """Outcome of the two feasibility questions behind frontier membership.

    ``dual_infeasible``: no ``Y ⪰ 0`` with ``A_i . Y = c_i``.
    ``alternative_infeasible``: no ``x`` with ``c^T x = 1`` and ``sum x_i A_i ⪯ 0``.
    The ``*_evidence`` fields hold either an :class:`InfeasibleSystem` error
    (with its certificate) or a feasible point.
    """

    dual_infeasible: bool
    alternative_infeasible: bool
    dual_evidence: object
    alternative_evidence: object

    def __bool__(self):
        return self.dual_infeasible and self.alternative_infeasible


def _dual_as_system(amap: LinearMapOnSym, c):
    """Parameterize ``{Y : A_i . Y = c_i}`` as an inequality system; ``(None, None)`` if empty."""
    out = dual_as_system(SemidefSystem(amap.A, la.zeros((amap.n, amap.n), amap.mode)), c)
    if out is None:
        return None, None
    lmi, _, _, Y0, _ = out
    return lmi, Y0


def _alternative_as_system(amap: LinearMapOnSym, c):
    mode, n = amap.mode, amap.n
    c = np.asarray(c, dtype=amap.A[0].dtype)
    cc = c @ c
    if (cc == 0) if mode == Mode.EXACT else (cc <= la.TAU_RANK):
        return None
    x0 = c / cc
    N = la.nullspace(c.reshape(1, -1))
    B = -la.linear_combination(x0, amap.A, mode, n)
    mats = [la.linear_combination(N[:, j], amap.A, mode, n) for j in range(N.shape[1])]
    if not mats:
        mats = [la.zeros((n, n), mode)]
    return SemidefSystem(tuple(mats), B), x0, N


def _feasibility(sys: SemidefSystem, cfg):
    try:
        return True, max_rank_slack(sys, cfg)
    except InfeasibleSystem as err:
        return False, err


def is_weakly_infeasible(map_or_mats, c, cfg=None) -> WeakInfeasibility:
    """Both the dual system for ``c`` and its alternative system are infeasible.

    Equivalent to ``c`` lying in the frontier of the image of the PSD cone.
    """
    amap = _as_map(map_or_mats)
    mode = amap.mode
    c = np.array([la.to_fraction(v) if mode == Mode.EXACT else float(v) for v in c], dtype=amap.A[0].dtype)
    if len(c) != amap.m:
        raise DimensionMismatch(f"c has length {len(c)}, expected {amap.m}")
    dsys, Y0 = _dual_as_system(amap, c)
    if dsys is None:
        dual_inf, dual_ev = True, InfeasibleSystem("linear constraints A_i . Y = c_i are inconsistent")
    else:
        feas, ev = _feasibility(dsys, cfg)
        dual_inf = not feas
        dual_ev = ev if dual_inf else _dual_point(dsys, ev)
    alt = _alternative_as_system(amap, c)
    if alt is None:
        alt_inf, alt_ev = True, InfeasibleSystem("c = 0, so c^T x = 1 is impossible")
    else:
        asys, x0, N = alt
        feas, ev = _feasibility(asys, cfg)
        alt_inf = not feas
        if feas:
            z = ev.x_Z
            alt_ev = x0 + (N @ z if N.shape[1] else 0 * x0)
        else:
            alt_ev = ev
    return WeakInfeasibility(dual_inf, alt_inf, dual_ev, alt_ev)


def _dual_point(dsys: SemidefSystem, slack: SlackResult):
    return slack.Z  # Y = Y0 - sum w_j E'_j is exactly the slack of the parameterized system


# ---------------------------------------------------------------- feasible directions


def _partition_index(Z) -> int:
    mode = la.mode_of(Z)
    n = Z.shape[0]
    r = 0
    while r < n and Z[r, r] > 0:
        r += 1
    for i in range(n):
        for j in range(n):
            v = Z[i, j]
            if i == j and i < r:
                if mode == Mode.FLOAT and abs(v - 1.0) > 1e-12:
                    raise DimensionMismatch("float Z must be diag(I_r, 0)")
                continue
            if (v != 0) if mode == Mode.EXACT else abs(v) > la.TAU_RANK:
                raise DimensionMismatch("Z must be diag(D, 0) with D positive diagonal")
    return r


def is_feasible_direction(Z, V) -> Direction:
    """Classify ``V`` relative to the cone of feasible directions of the PSD cone at ``Z``."""
    Z = np.asarray(Z)
    V = np.asarray(V)
    la.same_mode(Z, V)
    if Z.shape != V.shape or Z.shape[0] != Z.shape[1]:
        raise DimensionMismatch("Z and V must be square of the same size")
    r = _partition_index(Z)
    _, V12, V22 = la.blocks(V, r)
    if not la.is_psd(V22):
        return Direction.NOT_IN_CLOSURE
    inside, _ = la.range_contains(V22, V12.T)
    return Direction.IN_DIR if inside else Direction.IN_CLOSURE_NOT_DIR
