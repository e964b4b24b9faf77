"""Bad/good behavior of a semidefinite system.

Everything here works on a *normalized* system: its maximum-rank slack is
``diag(D, 0)`` with ``D`` an ``r x r`` positive diagonal, and ``r`` is stored
on the system. Blocks ``(1,1)``, ``(1,2)`` and ``(2,2)`` refer to that split.

* Good condition 2: every combination ``V`` of the ``A_i`` whose ``(2,2)``
  block vanishes also has a vanishing ``(1,2)`` block.
* Good condition 1: some ``U ≻ 0`` is orthogonal to every ``(2,2)`` block.
* Bad condition: some combination ``V`` has ``V22 ⪰ 0`` and
  ``range(V12^T)`` not contained in ``range(V22)``.

The system is badly behaved exactly when the Bad condition holds, which
happens exactly when one of the good conditions fails.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from . import rounding
from .errors import CertificateRoundingFailed, DimensionMismatch, InconsistentSlack
from .facial import SlackResult, max_rank_slack, normalize_assumption1, transform_slack
from .linalg import Mode
from .sdp import SdpProblem, SolverConfig, Status, solve
from .system import SemidefSystem

log = logging.getLogger(__name__)

TAU_POS = 1e-7


class Behavior(str, enum.Enum):
    BADLY_BEHAVED = "badly_behaved"
    WELL_BEHAVED = "well_behaved"


@dataclass(frozen=True)
class BadCertificate:
    """``V = sum lam_i A_i`` satisfying the Bad condition for partition ``r``.

    ``v22_witness`` proves ``V22 ⪰ 0`` and ``column`` is an index ``j`` such
    that column ``j`` of ``V12^T`` is outside ``range(V22)``. ``source``
    records which good condition failed.
    """

    lam: np.ndarray
    V: np.ndarray
    Z: np.ndarray
    r: int
    v22_witness: la.PsdVerdict
    column: int
    source: str


@dataclass(frozen=True)
class GoodCertificate:
    U: np.ndarray
    U_witness: la.PsdVerdict
    kernel_basis: tuple
    Z: np.ndarray
    r: int


@dataclass(frozen=True)
class Condition2:
    holds: bool
    kernel_basis: tuple
    counterexample: np.ndarray | None = None


@dataclass(frozen=True)
class Condition1:
    holds: bool
    U: np.ndarray | None = None
    W: np.ndarray | None = None
    lam: np.ndarray | None = None


@dataclass(frozen=True)
class Verdict:
    behavior: Behavior
    certificate: object
    slack: SlackResult
    normalized: SemidefSystem
    Q: np.ndarray
    normalized_slack: SlackResult

    @property
    def bad(self) -> bool:
        return self.behavior == Behavior.BADLY_BEHAVED


def _need_r(sys: SemidefSystem) -> int:
    if sys.r is None:
        raise DimensionMismatch("the system has no partition index r; normalize it first")
    return sys.r


def _lower_blocks(sys: SemidefSystem, r: int):
    return [la.blocks(a, r)[2] for a in sys.A]


def _normalize_lam(lam: np.ndarray) -> np.ndarray:
    if la.mode_of(lam) == Mode.EXACT:
        return la.primitive_scale(lam)
    nz = np.max(np.abs(lam))
    return lam / nz if nz > 0 else lam


def _first_nonzero_positive(lam: np.ndarray) -> np.ndarray:
    lam = _normalize_lam(lam)
    for v in lam:
        if not _zero(v):
            return lam if v > 0 else -lam
    return lam


def _zero(v) -> bool:
    return abs(v) <= la.TAU_RANK if isinstance(v, float) else v == 0


def lower_kernel(sys: SemidefSystem) -> np.ndarray:
    """Basis (columns) of ``{lam : sum lam_i (A_i)_22 = 0}``."""
    r = _need_r(sys)
    mode = sys.mode
    lows = _lower_blocks(sys, r)
    if sys.n - r == 0:
        return la.eye(sys.m, mode)
    M = np.column_stack([la.svec(b) for b in lows])
    return la.nullspace(M)


def check_good_condition2(sys: SemidefSystem) -> Condition2:
    r = _need_r(sys)
    K = lower_kernel(sys)
    basis = tuple(la.frozen(_first_nonzero_positive(K[:, j])) for j in range(K.shape[1]))
    for lam in basis:
        V = sys.lhs(lam)
        if not la.is_zero(la.blocks(V, r)[1]):
            return Condition2(False, basis, lam)
    return Condition2(True, basis)


def _constraint_basis(lows, q, mode):
    """Basis ``C_1..C_l`` of ``{U : B_i . U = 0}``."""
    if not lows:
        return [la.smat(col, q) for col in la.eye(q * (q + 1) // 2, mode).T]
    M = np.array([la.bullet_row(b) for b in lows], dtype=lows[0].dtype)
    N = la.nullspace(M)
    return [la.smat(N[:, j], q) for j in range(N.shape[1])]


def _orthogonal(U, lows) -> bool:
    return all(_zero(la.bullet(b, U)) for b in lows)


def check_good_condition1(sys: SemidefSystem, cfg: SolverConfig | None = None) -> Condition1:
    """Find ``U ≻ 0`` orthogonal to all lower-right blocks, or a dual witness ``W``.

    On failure ``W ⪰ 0``, ``W != 0`` lies in the span of the lower-right
    blocks and ``lam`` expresses it: ``W = sum lam_i (A_i)_22``.
    """
    cfg = cfg or SolverConfig()
    r = _need_r(sys)
    mode = sys.mode
    q = sys.n - r
    if q == 0:
        return Condition1(True, U=la.zeros((0, 0), mode))
    lows = _lower_blocks(sys, r)
    eye = la.eye(q, mode)
    if la.is_pd(eye) and _orthogonal(eye, lows):
        return Condition1(True, U=la.frozen(eye))
    C = _constraint_basis(lows, q, mode)
    t_star, U_f, W_f = _redp(C, q, cfg)
    zero = la.zero(mode)
    if t_star > TAU_POS and U_f is not None:
        U = rounding.rational_sym_point(U_f, lows, [zero] * len(lows), want_pd=True, mode=mode)
        if U is not None:
            if mode == Mode.EXACT:
                U = la.primitive_scale(U)
            return Condition1(True, U=la.frozen(U))
        raise CertificateRoundingFailed("strictly positive U found numerically but not exactly")
    W = None
    if W_f is not None:
        W = rounding.rational_sym_point(W_f, C + [eye], [zero] * len(C) + [la.one(mode)], mode=mode)
    if W is None:
        raise CertificateRoundingFailed("could not certify failure of the positive-definite condition")
    if mode == Mode.EXACT:
        W = la.primitive_scale(W)
    lam = la.solve_membership(W, lows, reverse=True)
    if lam is None:
        raise CertificateRoundingFailed("dual witness is not a combination of the lower-right blocks")
    return Condition1(False, W=la.frozen(W), lam=la.frozen(lam))


def _redp(C, q, cfg):
    """``sup t`` s.t. ``t I + sum x_j C_j ⪯ 0``, ``t <= 1``; returns ``(t, U, W)``."""

    def bd(X, s):
        out = np.zeros((q + 1, q + 1))
        out[:q, :q] = X
        out[q, q] = s
        return out

    mats = [bd(la.to_float(c), 0.0) for c in C] + [bd(np.eye(q), 1.0)]
    B = bd(np.zeros((q, q)), 1.0)
    obj = [0.0] * len(C) + [1.0]
    sol = solve(SdpProblem(SemidefSystem(tuple(mats), B), tuple(obj)), cfg)
    if sol.status != Status.OPTIMAL:
        log.debug("condition-1 solve ended with %s", sol.status.value)
    t = float(sol.x[-1])
    U = -(t * np.eye(q) + sum((x * la.to_float(c) for x, c in zip(sol.x[:-1], C)), np.zeros((q, q))))
    W = sol.Y[:q, :q]
    tr = np.trace(W)
    return t, U, (W / tr if tr > 1e-12 else None)


def construct_bad_certificate(sys: SemidefSystem, Z=None, cfg: SolverConfig | None = None):
    """Bad-condition certificate for a normalized system, or ``None`` if both good conditions hold."""
    r = _need_r(sys)
    mode = sys.mode
    if Z is None:
        Z = la.block_diag(la.eye(r, mode), la.zeros((sys.n - r, sys.n - r), mode))
    c2 = check_good_condition2(sys)
    if not c2.holds:
        lam, source = c2.counterexample, "good_condition_2"
    else:
        c1 = check_good_condition1(sys, cfg)
        if c1.holds:
            return None
        lam, source = _normalize_lam(c1.lam), "good_condition_1"
    return _bad_from_lambda(sys, lam, Z, source)


def _bad_from_lambda(sys, lam, Z, source):
    r = sys.r
    V = sys.lhs(lam)
    _, V12, V22 = la.blocks(V, r)
    witness = la.psd_check(V22)
    if not witness.psd:
        raise InconsistentSlack("the combination found has an indefinite lower-right block")
    inside, j = la.range_contains(V22, V12.T)
    if inside:
        raise InconsistentSlack(
            "range inclusion holds for the failing combination, so the slack was not of maximal rank"
        )
    return BadCertificate(la.frozen(lam), la.frozen(V), la.frozen(Z), r, witness, j, source)


def good_certificate(sys: SemidefSystem, Z=None, cfg: SolverConfig | None = None):
    """Good certificate for a normalized system, or ``None`` if a good condition fails."""
    r = _need_r(sys)
    mode = sys.mode
    if Z is None:
        Z = la.block_diag(la.eye(r, mode), la.zeros((sys.n - r, sys.n - r), mode))
    c2 = check_good_condition2(sys)
    if not c2.holds:
        return None
    c1 = check_good_condition1(sys, cfg)
    if not c1.holds:
        return None
    return GoodCertificate(c1.U, la.psd_check(c1.U), c2.kernel_basis, la.frozen(Z), r)


def verdict(sys: SemidefSystem, cfg: SolverConfig | None = None) -> Verdict:
    """Full pipeline: maximum-rank slack, normalization, conditions, certificate."""
    from . import certify

    slack = max_rank_slack(sys, cfg)
    normalized, Q = normalize_assumption1(sys, slack)
    nslack = transform_slack(slack, Q)
    Z = nslack.Z
    if slack.r == sys.n:
        cert = GoodCertificate(
            la.zeros((0, 0), sys.mode),
            la.psd_check(la.zeros((0, 0), sys.mode)),
            check_good_condition2(normalized).kernel_basis,
            Z,
            slack.r,
        )
        behavior = Behavior.WELL_BEHAVED
    else:
        cert = construct_bad_certificate(normalized, Z, cfg)
        if cert is None:
            cert = good_certificate(normalized, Z, cfg)
            behavior = Behavior.WELL_BEHAVED
        else:
            behavior = Behavior.BADLY_BEHAVED
    check = (
        certify.verify_bad(normalized, cert, nslack.certs)
        if behavior == Behavior.BADLY_BEHAVED
        else certify.verify_good(normalized, cert, nslack.certs)
    )
    if not check:
        raise InconsistentSlack(f"emitted certificate failed independent verification: {check.reason}")
    return Verdict(behavior, cert, slack, normalized, Q, nslack)
