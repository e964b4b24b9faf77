"""Bad and good normal forms, the bad objective, and dual completion.

All routines work on a normalized system (``r`` set, maximum-rank slack
``Z = diag(D, 0)``). Reformulation traces start at that normalized system.

Block names for a matrix ``A`` and partition ``r``::

    A = [[F, G], [G^T, H]]      F: r x r,  G: r x (n-r),  H: (n-r) x (n-r)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import certify
from . import linalg as la
from . import rounding
from .errors import (
    DimensionMismatch,
    InconsistentCertificate,
    NumericalLimit,
    Unbounded,
)
from .facial import Check
from .linalg import Mode
from .sdp import SdpProblem, SolverConfig, Status, solve
from .system import (
    ReformTrace,
    Swap,
    SemidefSystem,
    apply_trace,
    pull_back_objective,
    record,
    replace_step,
    shift_b,
)

log = logging.getLogger(__name__)


def _zero(v) -> bool:
    return abs(v) <= la.TAU_RANK if isinstance(v, float) else v == 0


@dataclass(frozen=True)
class _Blocks:
    system: SemidefSystem
    k: int
    trace: ReformTrace

    @property
    def r(self) -> int:
        return self.system.r

    def F(self, i):
        return self.system.A[i][: self.r, : self.r]

    def G(self, i):
        return self.system.A[i][: self.r, self.r :]

    def H(self, i):
        return self.system.A[i][self.r :, self.r :]


@dataclass(frozen=True)
class BadNormalForm(_Blocks):
    pass


@dataclass(frozen=True)
class GoodNormalForm(_Blocks):
    U: np.ndarray = None


def _need_r(sys):
    if sys.r is None:
        raise DimensionMismatch("the system has no partition index r; normalize it first")
    return sys.r


def _slack_coords(sys: SemidefSystem, Z):
    x = la.solve_membership(sys.B - Z, sys.A)
    if x is None:
        raise InconsistentCertificate("Z is not a slack of this system")
    return x


def _greedy_subset(vectors, first):
    """Indices of a maximal independent subset containing ``first`` (must be nonzero)."""
    chosen = [first]
    for j in range(len(vectors)):
        if j == first:
            continue
        trial = chosen + [j]
        if la.rank(np.column_stack([vectors[t] for t in trial])) == len(trial):
            chosen.append(j)
    return sorted(chosen)


def _permutation_steps(order):
    """Swaps turning positions ``0..m-1`` into ``order`` (``new[p] = old[order[p]]``)."""
    current = list(range(len(order)))
    steps = []
    for p, want in enumerate(order):
        q = current.index(want)
        if q != p:
            steps.append(Swap(p, q))
            current[p], current[q] = current[q], current[p]
    return steps


def _zeroing_steps(sys, cols, k, mode):
    """REPLACE steps making ``cols(A_j)`` zero for ``j < k`` using ``A_k..A_{m-1}``."""
    m = sys.m
    basis = [cols(sys.A[s]) for s in range(k, m)]
    steps = []
    for j in range(k):
        target = cols(sys.A[j])
        if la.is_zero(target):
            continue
        M = np.column_stack(basis)
        beta = la.solve_linear(M, target)
        if beta is None:
            raise InconsistentCertificate(f"A[{j}] block is not spanned by the selected subset")
        lam = [la.zero(mode)] * m
        lam[j] = la.one(mode)
        for s, b in zip(range(k, m), beta):
            lam[s] = -b
        steps.append(replace_step(j, lam, mode))
    return steps


def _last_cols(r):
    return lambda A: A[:, r:].reshape(-1)


def _lower_right(r):
    return lambda A: la.svec(A[r:, r:])


def to_bad_normal_form(sys, cert, x_Z=None, trace: ReformTrace | None = None) -> BadNormalForm:
    """Bring a normalized badly behaved system into the bad normal form.

    ``trace`` replays a user-supplied operation sequence instead of the
    built-in recipe; the result is verified either way.
    """
    r = _need_r(sys)
    mode = sys.mode
    chk = certify.verify_bad(sys, cert)
    if not chk:
        raise InconsistentCertificate(f"certificate does not match the system: {chk.reason}")
    if trace is not None:
        out = apply_trace(sys, trace)
        nf = BadNormalForm(out, _infer_k(out, _last_cols(r)), trace)
    else:
        nf = _bad_recipe(sys, cert, x_Z)
    check = verify_bad_normal_form(nf, cert.Z)
    if not check:
        raise InconsistentCertificate(f"bad normal form failed verification: {check.reason}")
    return nf


def _infer_k(sys, cols):
    k = 0
    while k < sys.m and la.is_zero(cols(sys.A[k])):
        k += 1
    return k


def _bad_recipe(sys, cert, x_Z):
    r, m, mode = sys.r, sys.m, sys.mode
    steps = []
    x = x_Z if x_Z is not None else _slack_coords(sys, cert.Z)
    if not la.is_zero(x):
        steps.append(shift_b([-v for v in x], mode))
    lam = list(cert.lam)
    i = max(j for j, v in enumerate(lam) if not _zero(v))
    is_unit = lam[i] == 1 and all(_zero(v) for j, v in enumerate(lam) if j != i)
    if not is_unit:
        steps.append(replace_step(i, lam, mode))
    if i != m - 1:
        steps.append(Swap(i, m - 1))
    _, cur = record(sys, steps)
    cols = _last_cols(r)
    subset = _greedy_subset([cols(a) for a in cur.A], m - 1)
    order = [j for j in range(m) if j not in subset] + subset
    steps += _permutation_steps(order)
    _, cur = record(sys, steps)
    k = m - len(subset)
    steps += _zeroing_steps(cur, cols, k, mode)
    trace, out = record(sys, steps)
    return BadNormalForm(out, k, trace)


def verify_bad_normal_form(nf: BadNormalForm, Z=None) -> Check:
    """Independent exact check of the three bad normal form conditions."""
    sys, r, k = nf.system, nf.r, nf.k
    if r is None:
        return Check(False, "partition index r is not set")
    n, m = sys.n, sys.m
    if not 0 <= k < m:
        return Check(False, f"split index k={k} leaves no special matrices")
    if Z is not None and not bool(np.all(sys.B == Z)):
        return Check(False, "right-hand side differs from the maximum-rank slack")
    if not certify._slack_shape_ok(sys.B, r, sys.mode):
        return Check(False, "right-hand side is not diag(D, 0)")
    for j in range(k):
        if not la.is_zero(sys.A[j][:, r:]):
            return Check(False, f"A[{j}] has nonzero last {n - r} columns")
    stack = np.column_stack([sys.A[j][:, r:].reshape(-1) for j in range(k, m)])
    if la.rank(stack) != m - k:
        return Check(False, "stacked [G; H] blocks of the special matrices are dependent")
    Hm = nf.H(m - 1)
    w = la.psd_check(Hm)
    if not w.psd or not w.verify(Hm):
        return Check(False, "H_m is not positive semidefinite")
    return Check(True)


# ---------------------------------------------------------------- bad objective


@dataclass(frozen=True)
class BadObjective:
    """Objective with a finite optimum that no dual solution attains.

    ``c_normal`` is ``-e_m`` on normal-form variables; ``c_source`` and
    ``offset`` express it on the variables of the trace's source system.
    The optimum is 0, attained at ``x = 0`` of the normal form.
    """

    c_normal: np.ndarray
    c_source: np.ndarray
    offset: object
    optimum: object
    x_normal: np.ndarray
    x_source: np.ndarray
    Hm_witness: la.PsdVerdict
    D: tuple


def bad_objective(nf: BadNormalForm) -> BadObjective:
    sys, mode, m, r = nf.system, nf.system.mode, nf.system.m, nf.r
    c = la.zeros(m, mode)
    c[m - 1] = -la.one(mode)
    c_src, offset = pull_back_objective(nf.trace, c, mode)
    from .system import variable_map

    L, d = variable_map(nf.trace, m, mode)
    x_nf = la.zeros(m, mode)
    D = tuple(sys.B[i, i] for i in range(r))
    return BadObjective(
        la.frozen(c), la.frozen(c_src), offset, la.zero(mode), la.frozen(x_nf),
        la.frozen(L @ x_nf + d), la.psd_check(nf.H(m - 1)), D,
    )


def verify_bad_objective(nf: BadNormalForm, obj: BadObjective) -> Check:
    """Re-check the argument that ``sup c^T x`` is 0 and no dual solution attains it.

    Every slack ``S`` satisfies ``S ⪯ ...`` with range inside ``range(Z)``,
    so ``x_{k+1..m} = 0`` by independence; a dual ``Y`` with value 0 has
    ``Y . Z = 0`` hence zero first ``r`` rows, and then
    ``A_m . Y = H_m . Y22 >= 0 != -1``.
    """
    chk = verify_bad_normal_form(nf)
    if not chk:
        return chk
    sys, m = nf.system, nf.system.m
    if not la.is_psd(sys.slack(obj.x_normal)):
        return Check(False, "x = 0 is not feasible")
    if obj.c_normal[m - 1] >= 0 or any(not _zero(v) for v in obj.c_normal[: m - 1]):
        return Check(False, "objective is not -e_m")
    if not obj.Hm_witness.psd or not obj.Hm_witness.verify(nf.H(m - 1)):
        return Check(False, "H_m witness does not verify")
    if any(not v > 0 for v in obj.D):
        return Check(False, "upper-left block of Z is not positive")
    return Check(True)


# ---------------------------------------------------------------- good form


def to_good_normal_form(sys, cert, x_Z=None, trace: ReformTrace | None = None) -> GoodNormalForm:
    r = _need_r(sys)
    mode = sys.mode
    chk = certify.verify_good(sys, cert)
    if not chk:
        raise InconsistentCertificate(f"certificate does not match the system: {chk.reason}")
    cols = _lower_right(r)
    if trace is not None:
        out = apply_trace(sys, trace)
        nf = GoodNormalForm(out, _infer_k(out, cols), trace, cert.U)
    else:
        steps = []
        x = x_Z if x_Z is not None else _slack_coords(sys, cert.Z)
        if not la.is_zero(x):
            steps.append(shift_b([-v for v in x], mode))
        _, cur = record(sys, steps)
        vecs = [cols(a) for a in cur.A]
        nonzero = [j for j, v in enumerate(vecs) if not la.is_zero(v)]
        subset = _greedy_subset(vecs, nonzero[0]) if nonzero else []
        order = [j for j in range(sys.m) if j not in subset] + subset
        steps += _permutation_steps(order)
        _, cur = record(sys, steps)
        k = sys.m - len(subset)
        steps += _zeroing_steps(cur, cols, k, mode)
        trace, out = record(sys, steps)
        nf = GoodNormalForm(out, k, trace, cert.U)
    check = verify_good_normal_form(nf, cert.Z)
    if not check:
        raise InconsistentCertificate(f"good normal form failed verification: {check.reason}")
    return nf


def verify_good_normal_form(nf: GoodNormalForm, Z=None) -> Check:
    sys, r, k = nf.system, nf.r, nf.k
    if r is None:
        return Check(False, "partition index r is not set")
    n, m = sys.n, sys.m
    if Z is not None and not bool(np.all(sys.B == Z)):
        return Check(False, "right-hand side differs from the maximum-rank slack")
    if not certify._slack_shape_ok(sys.B, r, sys.mode):
        return Check(False, "right-hand side is not diag(D, 0)")
    for j in range(k):
        if not la.is_zero(nf.H(j)):
            return Check(False, f"A[{j}] has a nonzero lower-right block")
        if not la.is_zero(nf.G(j)):
            return Check(False, f"A[{j}] has a nonzero off-diagonal block")
    if k < m:
        stack = np.column_stack([la.svec(nf.H(j)) for j in range(k, m)])
        if la.rank(stack) != m - k:
            return Check(False, "lower-right blocks of the special matrices are dependent")
    U = nf.U
    if U is None or U.shape != (n - r, n - r):
        return Check(False, "U missing or of the wrong size")
    if n - r and not la.is_pd(U):
        return Check(False, "U is not positive definite")
    for j in range(k, m):
        if not _zero(la.bullet(nf.H(j), U)):
            return Check(False, f"H[{j}] . U != 0")
    return Check(True)


# ---------------------------------------------------------------- dual completion


@dataclass(frozen=True)
class DualCompletion:
    Y: np.ndarray
    value: object
    x: np.ndarray
    lam: object
    exact: bool


def complete_dual_solution(nf: GoodNormalForm, c, cfg: SolverConfig | None = None) -> DualCompletion:
    """Optimal dual solution for ``sup c^T x`` over a good normal form.

    Feasible ``x`` have ``x_{k+1..m} = 0``, so the primal reduces to a Slater
    problem in the first ``k`` variables and ``r x r`` matrices. Its dual gives
    ``Y11``; the equality constraints of the special matrices fix ``Y22`` up
    to adding ``lam * U``, and ``lam`` is the least integer making it PSD.
    """
    cfg = cfg or SolverConfig()
    sys, r, k, m = nf.system, nf.r, nf.k, nf.system.m
    mode = sys.mode
    n = sys.n
    c = [la.to_fraction(v) if mode == Mode.EXACT else float(v) for v in c]
    if len(c) != m:
        raise DimensionMismatch(f"objective has length {len(c)}, expected {m}")
    D = sys.B[:r, :r]
    Fs = [nf.F(j) for j in range(k)]
    Y11, x_red, value, exact = _reduced_dual(D, Fs, c[:k], mode, cfg)
    work_mode = mode if exact else Mode.FLOAT
    if not exact:
        sysw = sys.to_float()
        nfw = GoodNormalForm(sysw, k, nf.trace, la.to_float(nf.U))
        c = [float(v) for v in c]
    else:
        nfw = nf
    q = n - r
    U = nfw.U
    if q:
        rows = [la.bullet_row(nfw.H(j)) for j in range(k, m)]
        rhs = [c[j] - la.bullet(nfw.F(j), Y11) for j in range(k, m)]
        if rows:
            M = np.array(rows, dtype=U.dtype)
            y = la.solve_linear(M, np.array(rhs, dtype=U.dtype))
            if y is None:
                raise InconsistentCertificate("lower-right equations have no solution")
            Y22 = la.smat(y, q)
        else:
            Y22 = la.zeros((q, q), work_mode)
        lam = _psd_shift(Y22, U, work_mode)
        Y22 = Y22 + lam * U
    else:
        Y22 = la.zeros((0, 0), work_mode)
        lam = la.zero(work_mode)
    Y = la.block_diag(Y11, Y22)
    x = la.zeros(m, work_mode)
    x[:k] = x_red
    return DualCompletion(la.frozen(Y), value, la.frozen(x), lam, exact)


def _psd_shift(Y22, U, mode):
    """Least integer ``lam >= 0`` with ``Y22 + lam U ⪰ 0`` (verified exactly in exact mode)."""
    Uf, Yf = la.to_float(U), la.to_float(Y22)
    w, V = np.linalg.eigh(Uf)
    S = V / np.sqrt(w)
    g = np.linalg.eigvalsh(S.T @ Yf @ S)[0]
    lam0 = max(0, math.floor(-g) - 1)
    for step in range(1000):
        lam = lam0 + step
        cand = Y22 + (la.to_fraction(lam) if mode == Mode.EXACT else float(lam)) * U
        if la.is_psd(cand):
            return la.to_fraction(lam) if mode == Mode.EXACT else float(lam)
    raise NumericalLimit("no integer shift makes the lower-right block PSD")


def _reduced_dual(D, Fs, c, mode, cfg):
    """``sup c^T x`` s.t. ``sum x_j F_j ⪯ D`` (Slater: ``D ≻ 0``) and its dual."""
    r = D.shape[0]
    k = len(Fs)
    if k == 0 or all(_zero(v) for v in c):
        return la.zeros((r, r), mode), la.zeros(k, mode), la.zero(mode), True
    if r == 0:
        raise Unbounded("objective is nonzero on unconstrained variables")
    red = SemidefSystem(tuple(Fs), D)
    sol = solve(SdpProblem(red, tuple(float(v) for v in c)), cfg)
    if sol.status == Status.UNBOUNDED_ABOVE:
        raise Unbounded("reduced problem is unbounded")
    if sol.status != Status.OPTIMAL:
        raise NumericalLimit(f"reduced problem ended with status {sol.status.value}")
    if mode == Mode.EXACT:
        exact = _round_pair(red, c, sol)
        if exact is not None:
            return exact
        log.info("reduced optimum did not round to a verified rational pair; returning float")
    return sol.Y, sol.x, float(sol.primal_value), False


def _round_pair(red, c, sol):
    mode = Mode.EXACT
    r = red.n
    zero = la.zero(mode)
    for den in rounding.DENOMINATORS:
        x = rounding.round_array(sol.x, den)
        if not la.is_psd(red.slack(x)):
            continue
        value = sum((ci * xi for ci, xi in zip(c, x)), zero)
        Y = rounding.rational_sym_point(sol.Y, list(red.A) + [red.B], list(c) + [value], mode=mode)
        if Y is None and all(v == 0 for v in c):
            Y = la.zeros((r, r), mode)
        if Y is not None and la.is_psd(Y):
            return Y, x, value, True
    return None
