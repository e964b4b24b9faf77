"""Semidefinite systems ``sum_i x_i A_i ⪯ B`` and elementary reformulations.

Four reformulation operations are supported, each a small frozen dataclass:

* :class:`Congruence` -- replace every matrix ``S`` by ``T^T S T`` with
  ``T = diag(I_r, M)``; needs the partition index ``r`` of the system.
* :class:`ShiftB` -- replace ``B`` by ``B + sum_j mu_j A_j``.
* :class:`Swap` -- exchange ``A_i`` and ``A_j``.
* :class:`Replace` -- replace ``A_i`` by ``sum_j lam_j A_j`` (``lam_i != 0``).

Indices are 0-based throughout.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from . import linalg as la
from .errors import DimensionMismatch, FingerprintMismatch, InvalidStep, ModeMismatch
from .linalg import Mode


def _scalar_text(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return repr(float(v))


@dataclass(frozen=True)
class SemidefSystem:
    """Constraint matrices ``A`` and right-hand side ``B``.

    ``r`` is set once the maximum rank slack is known to be
    ``diag(D, 0)`` with ``D`` an ``r x r`` positive diagonal matrix.
    """

    A: tuple
    B: np.ndarray
    r: int | None = None

    def __post_init__(self):
        A = tuple(self.A)
        if not A:
            raise DimensionMismatch("a system needs at least one constraint matrix")
        mode = la.same_mode(self.B, *A)
        n = self.B.shape[0]
        for i, Ai in enumerate(A):
            if Ai.shape != (n, n):
                raise DimensionMismatch(f"A[{i}] has shape {Ai.shape}, expected {(n, n)}")
        if self.r is not None and not 0 <= self.r <= n:
            raise DimensionMismatch(f"partition index r={self.r} outside [0, {n}]")
        object.__setattr__(self, "A", tuple(la.frozen(Ai) for Ai in A))
        object.__setattr__(self, "B", la.frozen(self.B))
        object.__setattr__(self, "_mode", mode)

    @classmethod
    def from_data(cls, A, B=None, r=None, mode: Mode | None = None):
        """Build from nested lists; ``B=None`` gives the homogeneous system."""
        if mode is None:
            mode = la.infer_mode([A] + ([B] if B is not None else []))
        mats = [la.sym(a, mode) for a in A]
        if B is None:
            Bm = la.zeros(mats[0].shape, mode)
        else:
            Bm = la.sym(B, mode)
        return cls(tuple(mats), Bm, r)

    @property
    def mode(self) -> Mode:
        return self._mode

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def m(self) -> int:
        return len(self.A)

    def lhs(self, x) -> np.ndarray:
        """``sum_i x_i A_i``."""
        return la.linear_combination(x, self.A, self.mode, self.n)

    def slack(self, x) -> np.ndarray:
        return self.B - self.lhs(x)

    def with_r(self, r: int | None) -> "SemidefSystem":
        return replace(self, r=r)

    def to_float(self) -> "SemidefSystem":
        if self.mode == Mode.FLOAT:
            return self
        return SemidefSystem(tuple(la.to_float(a) for a in self.A), la.to_float(self.B), self.r)

    def fingerprint(self) -> str:
        payload = {
            "mode": self.mode.value,
            "A": [[[_scalar_text(v) for v in row] for row in a] for a in self.A],
            "B": [[_scalar_text(v) for v in row] for row in self.B],
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def equals(self, other: "SemidefSystem") -> bool:
        """Entrywise equality of all data (exact comparison)."""
        if self.m != other.m or self.n != other.n or self.mode != other.mode:
            return False
        mats = zip(self.A + (self.B,), other.A + (other.B,))
        return all(bool(np.all(a == b)) for a, b in mats)


def _check_vec(vec, m, name):
    if len(vec) != m:
        raise InvalidStep(f"{name} has length {len(vec)}, expected {m}")


def _coeffs(values, mode):
    return tuple(la.to_fraction(v) if mode == Mode.EXACT else float(v) for v in values)


@dataclass(frozen=True)
class Congruence:
    M: np.ndarray

    def __post_init__(self):
        M = self.M
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise InvalidStep("congruence block must be square")
        if M.shape[0] and la.rank(M) < M.shape[0]:
            raise InvalidStep("congruence block is singular")
        object.__setattr__(self, "M", la.frozen(M))

    kind = "congruence"


@dataclass(frozen=True)
class ShiftB:
    mu: tuple
    kind = "shift_b"


@dataclass(frozen=True)
class Swap:
    i: int
    j: int
    kind = "swap"

    def __post_init__(self):
        if self.i == self.j:
            raise InvalidStep("swap needs two distinct indices")


@dataclass(frozen=True)
class Replace:
    i: int
    lam: tuple
    kind = "replace"

    def __post_init__(self):
        if not 0 <= self.i < len(self.lam):
            raise InvalidStep(f"replace index {self.i} out of range")
        if self.lam[self.i] == 0:
            raise InvalidStep("replace needs lam[i] != 0")


ReformStep = Union[Congruence, ShiftB, Swap, Replace]


def shift_b(mu, mode=Mode.EXACT) -> ShiftB:
    return ShiftB(_coeffs(mu, mode))


def replace_step(i, lam, mode=Mode.EXACT) -> Replace:
    return Replace(i, _coeffs(lam, mode))


def apply_step(sys: SemidefSystem, step: ReformStep) -> SemidefSystem:
    """Apply one elementary reformulation; ``sys`` is left untouched."""
    A = list(sys.A)
    B = sys.B
    m, n = sys.m, sys.n
    if isinstance(step, Congruence):
        if sys.r is None:
            raise InvalidStep("congruence needs the partition index r")
        if step.M.shape[0] != n - sys.r:
            raise InvalidStep(f"congruence block has size {step.M.shape[0]}, expected {n - sys.r}")
        la.same_mode(step.M, B)
        T = la.block_diag(la.eye(sys.r, sys.mode), step.M)
        A = [la.congruence(T, a) for a in A]
        B = la.congruence(T, B)
    elif isinstance(step, ShiftB):
        _check_vec(step.mu, m, "mu")
        _check_scalars(step.mu, sys.mode)
        B = B + sys.lhs(step.mu)
    elif isinstance(step, Swap):
        if not (0 <= step.i < m and 0 <= step.j < m):
            raise InvalidStep(f"swap indices ({step.i}, {step.j}) out of range for m={m}")
        A[step.i], A[step.j] = A[step.j], A[step.i]
    elif isinstance(step, Replace):
        _check_vec(step.lam, m, "lam")
        _check_scalars(step.lam, sys.mode)
        A[step.i] = sys.lhs(step.lam)
    else:
        raise InvalidStep(f"unknown step {step!r}")
    return SemidefSystem(tuple(A), B, sys.r)


def _check_scalars(values, mode):
    for v in values:
        if (mode == Mode.EXACT) != isinstance(v, Fraction):
            raise ModeMismatch("step coefficients and system use different scalar modes")


def invert_step(step: ReformStep) -> ReformStep:
    if isinstance(step, Congruence):
        return Congruence(la.inverse(step.M))
    if isinstance(step, ShiftB):
        return ShiftB(tuple(-v for v in step.mu))
    if isinstance(step, Swap):
        return step
    if isinstance(step, Replace):
        li = step.lam[step.i]
        lam = tuple((1 / li) if j == step.i else -v / li for j, v in enumerate(step.lam))
        return Replace(step.i, lam)
    raise InvalidStep(f"unknown step {step!r}")


@dataclass(frozen=True)
class ReformTrace:
    """Ordered reformulation steps with source and target fingerprints."""

    steps: tuple = ()
    source: str | None = None
    target: str | None = None

    def __len__(self):
        return len(self.steps)


def record(sys: SemidefSystem, steps: Sequence[ReformStep]):
    """Apply ``steps`` to ``sys`` and return ``(trace, result)``."""
    out = sys
    for s in steps:
        out = apply_step(out, s)
    trace = ReformTrace(tuple(steps), sys.fingerprint(), out.fingerprint())
    return trace, out


def apply_trace(sys: SemidefSystem, trace: ReformTrace, check: bool = True) -> SemidefSystem:
    if check and trace.source is not None and sys.fingerprint() != trace.source:
        raise FingerprintMismatch("trace was recorded against a different source system")
    out = sys
    for s in trace.steps:
        out = apply_step(out, s)
    if (
        check
        and trace.target is not None
        and sys.mode == Mode.EXACT
        and out.fingerprint() != trace.target
    ):
        raise FingerprintMismatch("replay did not reproduce the recorded target")
    return out


def invert_trace(trace: ReformTrace) -> ReformTrace:
    steps = tuple(invert_step(s) for s in reversed(trace.steps))
    return ReformTrace(steps, trace.target, trace.source)


def concat(first: ReformTrace, second: ReformTrace) -> ReformTrace:
    return ReformTrace(first.steps + second.steps, first.source, second.target)


def linear_combination(sys: SemidefSystem, lam) -> np.ndarray:
    """``sum_i lam_i A_i``."""
    if len(lam) != sys.m:
        raise DimensionMismatch(f"lambda has length {len(lam)}, expected {sys.m}")
    return la.frozen(sys.lhs(lam))


def variable_map(trace: ReformTrace, m: int, mode: Mode):
    """Affine map ``x_source = L @ x_target + d`` induced by a trace.

    Feasible points of the target system correspond one-to-one to feasible
    points of the source under this map, with identical slacks up to the
    congruences in the trace.
    """
    L = la.eye(m, mode)
    d = la.zeros(m, mode)
    for s in trace.steps:
        if isinstance(s, Swap):
            Ls = la.eye(m, mode)
            Ls[[s.i, s.j]] = Ls[[s.j, s.i]]
            L = L @ Ls
        elif isinstance(s, Replace):
            Ls = la.eye(m, mode)
            Ls[:, s.i] = np.array(s.lam, dtype=Ls.dtype)
            L = L @ Ls
        elif isinstance(s, ShiftB):
            d = d - L @ np.array(s.mu, dtype=L.dtype)
    return L, d


def pull_back_objective(trace: ReformTrace, c_target, mode: Mode):
    """Objective on source variables equal to ``c_target`` on target variables.

    Returns ``(c_source, offset)`` with
    ``c_target @ x_target == c_source @ x_source + offset``.
    """
    m = len(c_target)
    L, d = variable_map(trace, m, mode)
    c_t = np.array(list(c_target), dtype=L.dtype)
    # x_t = L^{-1} (x_s - d)
    Linv = la.inverse(L)
    c_s = Linv.T @ c_t
    offset = -(c_s @ d)
    return c_s, offset
