"""Small dense SDP solver for the well-posed auxiliary problems.

The primal is ``sup c^T x  s.t.  sum_i x_i A_i + S = B, S ⪰ 0`` and the dual
``inf B . Y  s.t.  A_i . Y = c_i, Y ⪰ 0``. The solver is an infeasible
primal-dual path-following method with Nesterov-Todd scaling and a
Mehrotra predictor-corrector step. It is meant for problems where at least
one side satisfies Slater's condition; on other inputs it may return
``NUMERICAL_LIMIT``, which callers must treat as "no answer".
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import linalg as la
from .errors import DimensionMismatch, InfeasiblePoint
from .linalg import Mode
from .system import SemidefSystem

log = logging.getLogger(__name__)

TAU_FEAS = 1e-8
TAU_GAP = 1e-8
MAX_ITER = 200
BLOWUP = 1e5


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    UNBOUNDED_ABOVE = "unbounded_above"
    PRIMAL_INFEASIBLE = "primal_infeasible"
    DUAL_INFEASIBLE = "dual_infeasible"
    NUMERICAL_LIMIT = "numerical_limit"


@dataclass(frozen=True)
class SdpProblem:
    system: SemidefSystem
    c: tuple

    def __post_init__(self):
        if len(self.c) != self.system.m:
            raise DimensionMismatch(f"objective has length {len(self.c)}, expected {self.system.m}")


@dataclass
class SolverConfig:
    tol: float = TAU_FEAS
    max_iter: int = MAX_ITER
    step_fraction: float = 0.95


@dataclass
class SdpSolution:
    x: np.ndarray
    S: np.ndarray
    Y: np.ndarray
    primal_value: float
    dual_value: float
    status: Status
    iterations: int = 0
    residuals: dict = field(default_factory=dict)


def _max_step(L: np.ndarray, D: np.ndarray) -> float:
    """Largest ``a <= 1`` with ``L L^T + a D ⪰ 0``."""
    Linv = scipy.linalg.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    T = Linv @ D @ Linv.T
    lam = np.linalg.eigvalsh((T + T.T) / 2)[0]
    return 1.0 if lam >= 0 else min(1.0, -1.0 / lam)


def _residuals(A, B, c, x, Y, S):
    Ax = np.array([np.sum(a * Y) for a in A])
    rp = c - Ax
    Rd = B - S - sum(xi * a for xi, a in zip(x, A))
    pv, dv = float(c @ x), float(np.sum(B * Y))
    return rp, Rd, pv, dv


def solve(problem: SdpProblem, cfg: SolverConfig | None = None) -> SdpSolution:
    cfg = cfg or SolverConfig()
    sys = problem.system.to_float()
    A = [np.asarray(a, dtype=float) for a in sys.A]
    B = np.asarray(sys.B, dtype=float)
    c = np.array([float(v) for v in problem.c])
    n, m = sys.n, sys.m

    normA = max([np.linalg.norm(a) for a in A] + [1.0])
    xi = max(10.0, np.sqrt(n), n * max((1 + abs(ci)) / (1 + np.linalg.norm(a)) for ci, a in zip(c, A)))
    eta = max(10.0, np.sqrt(n), np.linalg.norm(B), normA)
    Y = xi * np.eye(n)
    S = eta * np.eye(n)
    x = np.zeros(m)
    nb, nc = 1.0 + np.linalg.norm(c), 1.0 + np.linalg.norm(B)

    status = Status.NUMERICAL_LIMIT
    best = None
    it = 0
    for it in range(1, cfg.max_iter + 1):
        rp, Rd, pv, dv = _residuals(A, B, c, x, Y, S)
        mu = np.sum(Y * S) / n
        relp = np.linalg.norm(rp) / nb
        reld = np.linalg.norm(Rd) / nc
        gap = abs(dv - pv) / (1.0 + abs(pv) + abs(dv))
        res = {"primal": relp, "dual": reld, "gap": gap}
        score = max(relp, reld, gap)
        if best is None or score < best[0]:
            best = (score, x.copy(), Y.copy(), S.copy(), res)
        if relp <= cfg.tol and reld <= cfg.tol and gap <= cfg.tol:
            status = Status.OPTIMAL
            break
        # divergence tests: rays certify unboundedness / infeasibility
        nx, nY = np.linalg.norm(x), np.linalg.norm(Y)
        if nx > 1e8 and reld <= 1e-6:
            d = x / nx
            ray = sum(di * a for di, a in zip(d, A))
            if c @ d > 1e-8 and np.linalg.eigvalsh(ray)[-1] <= 1e-6:
                status = Status.UNBOUNDED_ABOVE
                break
        if nY > 1e8 and relp <= 1e-6:
            D = Y / nY
            if np.sum(B * D) < -1e-8 and max(abs(np.sum(a * D)) for a in A) <= 1e-6:
                status = Status.PRIMAL_INFEASIBLE
                break
        try:
            Ly = np.linalg.cholesky(Y)
            Ls = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            break
        U, sv, Vt = np.linalg.svd(Ls.T @ Ly)
        G = Ly @ Vt.T / np.sqrt(sv)
        Ginv = (np.sqrt(sv)[:, None] * Vt) @ scipy.linalg.solve_triangular(Ly, np.eye(n), lower=True)
        W = G @ G.T
        WAW = [W @ a @ W for a in A]
        M = np.array([[np.sum(ai * waw) for waw in WAW] for ai in A])
        try:
            fac = scipy.linalg.cho_factor(M)
            msolve = lambda r: scipy.linalg.cho_solve(fac, r)
        except (np.linalg.LinAlgError, ValueError):
            msolve = lambda r: np.linalg.lstsq(M, r, rcond=None)[0]
        WRdW = W @ Rd @ W
        vsum = sv[:, None] + sv[None, :]

        def direction(Rc):
            P = Rc / vsum
            GPG = G @ P @ G.T
            rhs = np.array([rp[i] - np.sum(A[i] * GPG) + np.sum(A[i] * WRdW) for i in range(m)])
            dx = msolve(rhs)
            dS = Rd - sum(di * a for di, a in zip(dx, A))
            dY = GPG - W @ dS @ W
            return dx, (dY + dY.T) / 2, (dS + dS.T) / 2

        Vd = np.diag(sv)
        dx, dY, dS = direction(-2 * Vd @ Vd)
        ap, ad = _max_step(Ly, dY), _max_step(Ls, dS)
        mu_aff = np.sum((Y + ap * dY) * (S + ad * dS)) / n
        sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
        dYt = Ginv @ dY @ Ginv.T
        dSt = G.T @ dS @ G
        corr = dYt @ dSt + dSt @ dYt
        dx, dY, dS = direction(2 * sigma * mu * np.eye(n) - 2 * Vd @ Vd - corr)
        ap = min(1.0, cfg.step_fraction * _max_step(Ly, dY))
        ad = min(1.0, cfg.step_fraction * _max_step(Ls, dS))
        Y = Y + ap * dY
        x = x + ad * dx
        S = S + ad * dS
        if ap < 1e-12 and ad < 1e-12:
            break

    if status == Status.NUMERICAL_LIMIT and best is not None:
        _, x, Y, S, res = best
    scale = 1.0 + np.linalg.norm(B) + np.linalg.norm(c) + normA
    if status == Status.OPTIMAL and max(np.linalg.norm(x), np.linalg.norm(Y)) > BLOWUP * scale:
        # near-optimal only along a diverging sequence: optimum not attained
        status = Status.NUMERICAL_LIMIT
    rp, Rd, pv, dv = _residuals(A, B, c, x, Y, S)
    res = {
        "primal": float(np.linalg.norm(rp) / nb),
        "dual": float(np.linalg.norm(Rd) / nc),
        "gap": float(abs(dv - pv) / (1.0 + abs(pv) + abs(dv))),
    }
    log.debug("sdp solve: status=%s iterations=%d residuals=%s", status.value, it, res)
    return SdpSolution(x, S, Y, pv, dv, status, it, res)


def check_weak_duality(problem: SdpProblem, x, Y):
    """Verify feasibility of ``x`` and ``Y`` and return the gap ``B . Y - c^T x``.

    Exact data is checked exactly; float data to ``TAU_FEAS``.
    """
    sys = problem.system
    mode = sys.mode
    x = la.vector(x, mode)
    Y = la.sym(Y, mode)
    if len(x) != sys.m:
        raise DimensionMismatch("x has the wrong length")
    S = sys.slack(x)
    if not la.is_psd(S):
        raise InfeasiblePoint("primal point: slack B - sum x_i A_i is not PSD")
    if not la.is_psd(Y):
        raise InfeasiblePoint("dual point: Y is not PSD")
    for i, (a, ci) in enumerate(zip(sys.A, problem.c)):
        val = la.bullet(a, Y)
        ci = la.to_fraction(ci) if mode == Mode.EXACT else float(ci)
        bad = val != ci if mode == Mode.EXACT else abs(val - ci) > TAU_FEAS * (1 + abs(ci))
        if bad:
            raise InfeasiblePoint(f"dual point: A[{i}] . Y = {val} differs from c[{i}] = {ci}")
    c = [la.to_fraction(v) if mode == Mode.EXACT else float(v) for v in problem.c]
    return la.bullet(sys.B, Y) - sum((ci * xi for ci, xi in zip(c, x)), la.zero(mode))
