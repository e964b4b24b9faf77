"""Dense symmetric-matrix kernel over exact rationals and float64.

Matrices are plain numpy arrays. Exact matrices use ``dtype=object`` with
:class:`fractions.Fraction` entries, float matrices use ``float64``. The
scalar mode of an array is read off its dtype, and mixing the two modes in
one operation raises :class:`~sdpnormal.errors.ModeMismatch`.
"""

from __future__ import annotations

import enum
import numbers
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import AsymmetricMatrix, DimensionMismatch, ModeMismatch

TAU_PSD = 1e-8
TAU_RANK = 1e-8
SYM_RTOL = 1e-12


class Mode(str, enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


def to_fraction(value) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings; floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ModeMismatch(f"cannot use {value!r} ({type(value).__name__}) as an exact scalar")


def mode_of(a) -> Mode:
    a = np.asarray(a)
    return Mode.EXACT if a.dtype == object else Mode.FLOAT


def same_mode(*arrays) -> Mode:
    modes = {mode_of(a) for a in arrays}
    if len(modes) > 1:
        raise ModeMismatch("exact and float operands mixed")
    return modes.pop() if modes else Mode.EXACT


def infer_mode(data) -> Mode:
    flat = np.asarray(data, dtype=object).ravel()
    for v in flat:
        if isinstance(v, (float, np.floating)):
            return Mode.FLOAT
    return Mode.EXACT


def matrix(data, mode: Mode | None = None) -> np.ndarray:
    """Build a general 2-d (or 1-d) array in the requested scalar mode."""
    if mode is None:
        mode = infer_mode(data)
    if mode == Mode.EXACT:
        raw = np.asarray(data, dtype=object)
        out = np.empty(raw.shape, dtype=object)
        for idx, v in np.ndenumerate(raw):
            out[idx] = to_fraction(v)
        return out
    return np.array(np.asarray(data, dtype=object), dtype=float)


def vector(data, mode: Mode | None = None) -> np.ndarray:
    return matrix(list(data), mode)


def sym(data, mode: Mode | None = None) -> np.ndarray:
    """Validated read-only symmetric matrix.

    Asymmetric input is an error, never silently symmetrized.
    """
    a = matrix(data, mode)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if mode_of(a) == Mode.EXACT:
        for i in range(n):
            for j in range(i + 1, n):
                if a[i, j] != a[j, i]:
                    raise AsymmetricMatrix(f"entries ({i},{j}) and ({j},{i}) differ")
    else:
        scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
        diff = np.abs(a - a.T)
        if diff.size and diff.max() > SYM_RTOL * scale:
            i, j = np.unravel_index(np.argmax(diff), diff.shape)
            raise AsymmetricMatrix(f"entries ({i},{j}) and ({j},{i}) differ")
        a = (a + a.T) / 2
    a.setflags(write=False)
    return a


def zeros(shape, mode: Mode) -> np.ndarray:
    if mode == Mode.EXACT:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def eye(n: int, mode: Mode) -> np.ndarray:
    out = zeros((n, n), mode)
    for i in range(n):
        out[i, i] = Fraction(1) if mode == Mode.EXACT else 1.0
    return out


def one(mode: Mode):
    return Fraction(1) if mode == Mode.EXACT else 1.0


def zero(mode: Mode):
    return Fraction(0) if mode == Mode.EXACT else 0.0


def to_float(a) -> np.ndarray:
    return np.array(np.asarray(a, dtype=object), dtype=float)


def frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=a.dtype)
    a.setflags(write=False)
    return a


def blocks(S: np.ndarray, r: int):
    """Return ``(S11, S12, S22)`` with ``S11`` of size ``r x r``."""
    return S[:r, :r], S[:r, r:], S[r:, r:]


def block_diag(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    mode = same_mode(X, Y)
    p, q = X.shape[0], Y.shape[0]
    out = zeros((p + q, p + q), mode)
    out[:p, :p] = X
    out[p:, p:] = Y
    return out


def is_zero(a) -> bool:
    a = np.asarray(a)
    if a.size == 0:
        return True
    if mode_of(a) == Mode.EXACT:
        return all(v == 0 for v in a.ravel())
    return bool(np.max(np.abs(a)) <= TAU_RANK)


def bullet(S: np.ndarray, T: np.ndarray):
    """Trace inner product ``trace(S T)`` of two symmetric matrices."""
    same_mode(S, T)
    if S.shape != T.shape:
        raise DimensionMismatch(f"shapes {S.shape} and {T.shape} differ")
    if mode_of(S) == Mode.EXACT:
        return sum((S * T).ravel(), Fraction(0))
    return float(np.sum(S * T))


def svec(S: np.ndarray) -> np.ndarray:
    """Upper triangle of ``S`` (row-major, diagonal included), unweighted."""
    n = S.shape[0]
    iu = np.triu_indices(n)
    return S[iu]


def smat(v, n: int) -> np.ndarray:
    mode = mode_of(v)
    out = zeros((n, n), mode)
    iu = np.triu_indices(n)
    out[iu] = v
    out.T[iu] = v
    return out


def bullet_row(A: np.ndarray) -> np.ndarray:
    """Coefficients ``a`` with ``a . svec(W) == A . W`` for every symmetric ``W``."""
    n = A.shape[0]
    iu = np.triu_indices(n)
    row = A[iu].copy()
    off = iu[0] != iu[1]
    row[off] = row[off] * 2
    return row


def _float_tol(M: np.ndarray) -> float:
    return TAU_RANK * (1.0 + (float(np.max(np.abs(M))) if M.size else 0.0))


def rref(M: np.ndarray, reverse: bool = False):
    """Reduced row echelon form.

    Returns ``(R, pivots)``. With ``reverse=True`` pivot columns are taken
    from the right, which makes later columns basic.
    """
    mode = mode_of(M)
    R = np.array(M, dtype=object if mode == Mode.EXACT else float)
    rows, cols = R.shape
    tol = 0 if mode == Mode.EXACT else _float_tol(R)
    order = range(cols - 1, -1, -1) if reverse else range(cols)
    pivots = []
    row = 0
    for col in order:
        if row >= rows:
            break
        if mode == Mode.EXACT:
            piv = next((i for i in range(row, rows) if R[i, col] != 0), None)
        else:
            i = row + int(np.argmax(np.abs(R[row:, col])))
            piv = i if abs(R[i, col]) > tol else None
        if piv is None:
            continue
        if piv != row:
            R[[row, piv]] = R[[piv, row]]
        R[row] = R[row] / R[row, col]
        for i in range(rows):
            if i != row and R[i, col] != 0:
                R[i] = R[i] - R[i, col] * R[row]
        if mode == Mode.FLOAT:
            R[np.abs(R) <= tol] = 0.0
        pivots.append(col)
        row += 1
    return R, pivots


def rank(M: np.ndarray) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    if mode_of(M) == Mode.FLOAT:
        s = np.linalg.svd(M, compute_uv=False)
        return int(np.sum(s > TAU_RANK * (1.0 + s[0])))
    return len(rref(M)[1])


def nullspace(M: np.ndarray, reverse: bool = False) -> np.ndarray:
    """Basis of ``{x : M x = 0}`` as the columns of the returned matrix."""
    mode = mode_of(M)
    rows, cols = M.shape
    if rows == 0:
        return eye(cols, mode)
    R, pivots = rref(M, reverse=reverse)
    free = [c for c in range(cols) if c not in pivots]
    basis = zeros((cols, len(free)), mode)
    for k, f in enumerate(free):
        basis[f, k] = one(mode)
        for i, p in enumerate(pivots):
            basis[p, k] = -R[i, f]
    return basis


def solve_linear(M: np.ndarray, b: np.ndarray, reverse: bool = False):
    """One solution of ``M x = b`` (free variables zero) or ``None``."""
    mode = same_mode(M, b)
    rows, cols = M.shape
    if rows == 0:
        return zeros(cols, mode)
    aug = zeros((rows, cols + 1), mode)
    aug[:, :cols] = M
    aug[:, cols] = b
    if reverse:
        # keep the right-hand side column last while pivoting from the right
        perm = list(range(cols - 1, -1, -1))
        aug2 = zeros((rows, cols + 1), mode)
        aug2[:, :cols] = M[:, perm]
        aug2[:, cols] = b
        x = solve_linear(aug2[:, :cols], aug2[:, cols])
        if x is None:
            return None
        out = zeros(cols, mode)
        out[perm] = x
        return out
    R, pivots = rref(aug)
    if cols in pivots:
        return None
    x = zeros(cols, mode)
    for i, p in enumerate(pivots):
        x[p] = R[i, cols]
    if mode == Mode.FLOAT:
        res = M @ x - b
        if np.max(np.abs(res), initial=0.0) > 1e3 * _float_tol(aug):
            return None
    return x


def inverse(M: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    if M.shape != (n, n):
        raise DimensionMismatch("inverse of a non-square matrix")
    mode = mode_of(M)
    if mode == Mode.FLOAT:
        return np.linalg.inv(M)
    aug = zeros((n, 2 * n), mode)
    aug[:, :n] = M
    aug[:, n:] = eye(n, mode)
    R, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise np.linalg.LinAlgError("matrix is singular")
    return R[:, n:]


def congruence(M: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Return ``M^T S M``."""
    same_mode(M, S)
    if M.shape[0] != S.shape[0]:
        raise DimensionMismatch(f"cannot form M^T S M with M {M.shape}, S {S.shape}")
    out = M.T @ S @ M
    if mode_of(out) == Mode.FLOAT:
        out = (out + out.T) / 2
    return frozen(out)


def range_contains(V22: np.ndarray, V12T: np.ndarray):
    """Decide ``R(V12T) ⊆ R(V22)``.

    Returns ``(True, D)`` with ``V12T == V22 @ D`` when the inclusion holds,
    otherwise ``(False, j)`` where column ``j`` of ``V12T`` lies outside.
    """
    mode = same_mode(V22, V12T)
    if V22.shape[0] != V12T.shape[0]:
        raise DimensionMismatch("row dimensions of V22 and V12^T differ")
    q, r = V12T.shape
    D = zeros((V22.shape[1], r), mode)
    for j in range(r):
        col = solve_linear(V22, V12T[:, j])
        if col is None:
            return False, j
        D[:, j] = col
    return True, D


def solve_membership(W: np.ndarray, basis, reverse: bool = False):
    """Coefficients ``lam`` with ``sum(lam_i * basis_i) == W`` or ``None``."""
    basis = list(basis)
    mode = same_mode(W, *basis)
    if not basis:
        return zeros(0, mode) if is_zero(W) else None
    M = np.column_stack([svec(B) for B in basis])
    return solve_linear(M, svec(W), reverse=reverse)


def linear_combination(coeffs, mats, mode: Mode, n: int) -> np.ndarray:
    out = zeros((n, n), mode)
    for c, A in zip(coeffs, mats):
        if c != 0:
            out = out + c * A
    return out


@dataclass(frozen=True)
class PsdVerdict:
    """Outcome of :func:`psd_check` with a re-verifiable witness.

    PSD: ``S == F @ diag(d) @ F.T`` with ``d >= 0``. Otherwise ``v`` has
    ``v^T S v < 0``.
    """

    psd: bool
    F: np.ndarray | None = None
    d: np.ndarray | None = None
    v: np.ndarray | None = None

    def __bool__(self):
        return self.psd

    def verify(self, S: np.ndarray) -> bool:
        exact = mode_of(S) == Mode.EXACT
        if self.psd:
            if any(x < 0 for x in self.d):
                return False
            R = self.F @ np.diag(self.d) @ self.F.T if len(self.d) else zeros(S.shape, mode_of(S))
            if exact:
                return bool(np.all(R == S))
            scale = 1.0 + float(np.max(np.abs(S))) if S.size else 1.0
            return bool(np.max(np.abs(R - S), initial=0.0) <= 1e-10 * scale)
        q = self.v @ S @ self.v
        return bool(q < 0)


def ldl_pivoted(S: np.ndarray):
    """Diagonally pivoted LDL^T for exact symmetric ``S``.

    Returns ``(perm, L, d, failure)``. ``failure`` is ``None`` when ``S`` is
    PSD; otherwise it is a vector ``v`` with ``v^T S v < 0``.
    """
    n = S.shape[0]
    W = np.array(S, dtype=object)
    perm = list(range(n))
    L = eye(n, Mode.EXACT)
    d = [Fraction(0)] * n

    def witness(k, u):
        y = [Fraction(0)] * k + list(u)
        v = [Fraction(0)] * n
        for i in range(n - 1, -1, -1):
            v[i] = y[i] - sum((L[j, i] * v[j] for j in range(i + 1, n)), Fraction(0))
        x = zeros(n, Mode.EXACT)
        for i in range(n):
            x[perm[i]] = v[i]
        return x

    for k in range(n):
        lo = min(range(k, n), key=lambda i: W[i, i])
        if W[lo, lo] < 0:
            u = [Fraction(0)] * (n - k)
            u[lo - k] = Fraction(1)
            return perm, L, d, witness(k, u)
        p = max(range(k, n), key=lambda i: W[i, i])
        if W[p, p] == 0:
            for i in range(k, n):
                for j in range(i + 1, n):
                    if W[i, j] != 0:
                        u = [Fraction(0)] * (n - k)
                        u[i - k] = Fraction(1)
                        u[j - k] = Fraction(-1) if W[i, j] > 0 else Fraction(1)
                        return perm, L, d, witness(k, u)
            break
        if p != k:
            W[[k, p]] = W[[p, k]]
            W[:, [k, p]] = W[:, [p, k]]
            perm[k], perm[p] = perm[p], perm[k]
            L[[k, p], :k] = L[[p, k], :k]
        piv = W[k, k]
        d[k] = piv
        col = W[k + 1:, k] / piv
        L[k + 1:, k] = col
        W[k + 1:, k + 1:] = W[k + 1:, k + 1:] - np.outer(col, W[k, k + 1:])
        W[k + 1:, k] = Fraction(0)
        W[k, k + 1:] = Fraction(0)
    return perm, L, np.array(d, dtype=object), None


def psd_check(S: np.ndarray, tol: float | None = None) -> PsdVerdict:
    """Decide ``S ⪰ 0`` and return a witness for the answer.

    Exact mode uses pivoted symmetric elimination; float mode thresholds the
    smallest eigenvalue at ``-TAU_PSD * (1 + ||S||_inf)``.
    """
    n = S.shape[0]
    if n == 0:
        mode = mode_of(S)
        return PsdVerdict(True, zeros((0, 0), mode), zeros(0, mode))
    if mode_of(S) == Mode.EXACT:
        perm, L, d, failure = ldl_pivoted(S)
        if failure is not None:
            return PsdVerdict(False, v=failure)
        F = zeros((n, n), Mode.EXACT)
        for i in range(n):
            F[perm[i]] = L[i]
        return PsdVerdict(True, F=F, d=d)
    if tol is None:
        tol = TAU_PSD * (1.0 + float(np.max(np.sum(np.abs(S), axis=1))))
    w, Q = np.linalg.eigh(S)
    if w[0] < -tol:
        return PsdVerdict(False, v=Q[:, 0])
    return PsdVerdict(True, F=Q, d=np.clip(w, 0.0, None))


def is_psd(S: np.ndarray) -> bool:
    return psd_check(S).psd


def is_pd(S: np.ndarray) -> bool:
    """Positive definiteness (exact in exact mode)."""
    n = S.shape[0]
    if n == 0:
        return True
    if mode_of(S) == Mode.EXACT:
        _, _, d, failure = ldl_pivoted(S)
        return failure is None and all(x > 0 for x in d)
    w = np.linalg.eigvalsh(S)
    return bool(w[0] > TAU_PSD * (1.0 + float(np.max(np.abs(S)))))


def min_eig(S: np.ndarray) -> float:
    if S.shape[0] == 0:
        return float("inf")
    return float(np.linalg.eigvalsh(to_float(S))[0])


def primitive_scale(v: np.ndarray) -> np.ndarray:
    """Positive multiple of an exact vector/matrix with coprime integer entries."""
    from math import gcd

    flat = [x for x in np.asarray(v).ravel() if x != 0]
    if not flat:
        return np.array(v, dtype=object)
    den = 1
    for x in flat:
        den = den * x.denominator // gcd(den, x.denominator)
    g = 0
    for x in flat:
        g = gcd(g, abs(int(x * den)))
    return np.array(v, dtype=object) * Fraction(den, g)
