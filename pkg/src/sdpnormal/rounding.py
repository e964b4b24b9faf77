"""Turn floating-point SDP output into exactly verified rational objects.

Every routine here returns either an object that passed an exact check or
``None``; callers decide whether a ``None`` is fatal.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import scipy.linalg

from . import linalg as la
from .linalg import Mode

DENOMINATORS = (1, 2, 3, 4, 6, 8, 10, 12, 100, 1000, 10**4, 10**5, 10**6)


def round_array(a, max_den: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = Fraction(v).limit_denominator(max_den)
    return out


def project_affine(x: np.ndarray, M: np.ndarray, b: np.ndarray):
    """Orthogonal projection of ``x`` onto ``{y : M y = b}`` (exact for exact data).

    Returns ``None`` when the affine set is empty.
    """
    mode = la.same_mode(x, M, b)
    if M.shape[0] == 0:
        return x
    R, piv = la.rref(M.T)
    rows = piv  # independent rows of M
    Mi, bi = M[rows], b[rows]
    if la.solve_linear(M, b) is None:
        return None
    res = Mi @ x - bi
    G = Mi @ Mi.T
    y = la.solve_linear(G, res)
    return x - Mi.T @ y


def _sym_constraints(mats, rhs, mode):
    if not mats:
        return la.zeros((0, 0), mode), la.zeros(0, mode)
    M = np.array([la.bullet_row(a) for a in mats], dtype=object if mode == Mode.EXACT else float)
    b = np.array(list(rhs), dtype=M.dtype)
    return M, b


def _accept(W, want_pd, extra=None):
    if extra is not None and not extra(W):
        return False
    if W.shape[0] == 0:
        return True
    return la.is_pd(W) if want_pd else la.psd_check(W).psd and not la.is_zero(W)


def rational_sym_point(W_float, mats, rhs, want_pd=False, mode=Mode.EXACT, extra=None):
    """Exact symmetric ``W`` near ``W_float`` with ``mats_i . W == rhs_i``.

    ``W`` is additionally PSD and nonzero (or PD when ``want_pd``). Tries
    continued-fraction rounding at increasing denominators followed by exact
    projection; if that fails and ``W_float`` is numerically low rank, the
    search is repeated inside a rational basis of its numerical range.
    ``extra`` is an additional predicate every accepted ``W`` must satisfy.
    """
    k = W_float.shape[0]
    if mode == Mode.FLOAT:
        M, b = _sym_constraints([la.to_float(a) for a in mats], [float(v) for v in rhs], mode)
        w = np.asarray(la.svec(np.asarray(W_float, dtype=float)), dtype=float)
        if M.shape[0]:
            w = w - M.T @ np.linalg.lstsq(M @ M.T, M @ w - b, rcond=None)[0]
        W = la.smat(w, k)
        return W if _accept(W, want_pd, extra) else None
    M, b = _sym_constraints(list(mats), [la.to_fraction(v) for v in rhs], mode)
    for den in DENOMINATORS:
        w = la.svec(round_array(W_float, den))
        w = project_affine(w, M, b) if M.shape[0] else w
        if w is None:
            return None
        W = la.smat(w, k)
        if _accept(W, want_pd, extra):
            return W
    if want_pd:
        return None
    return _low_rank_point(W_float, list(mats), list(rhs), extra)


def rational_range_bases(W_float, max_rank=None):
    """Candidate exact bases of the numerical range of a PSD float matrix.

    Ranks are tried in increasing order, restricted to positions of a visible
    eigenvalue gap; for each rank the reduced row echelon form of the
    dominant eigenvectors is rounded at every denominator in turn.
    """
    W_float = np.asarray(W_float, dtype=float)
    k = W_float.shape[0]
    w, U = np.linalg.eigh((W_float + W_float.T) / 2)
    w, U = w[::-1], U[:, ::-1]
    top = max(w[0], 1e-300)
    limit = k - 1 if max_rank is None else min(max_rank, k - 1)
    seen = set()
    for rank in range(1, limit + 1):
        nxt = max(w[rank], 0.0)
        if w[rank - 1] <= 1e-12 * top or nxt > 1e-2 * w[rank - 1]:
            continue
        Vt = U[:, :rank].T
        _, _, cols = scipy.linalg.qr(Vt, pivoting=True)
        piv = sorted(cols[:rank])
        R = np.linalg.solve(Vt[:, piv], Vt)
        R[:, piv] = np.eye(rank)
        for den in DENOMINATORS:
            Rr = round_array(R[:rank], den)
            key = tuple(map(str, Rr.ravel()))
            if key in seen or la.rank(Rr) != rank:
                continue
            seen.add(key)
            yield Rr.T


def _low_rank_point(W_float, mats, rhs, extra=None):
    W_float = np.asarray(W_float, dtype=float)
    for Rb in rational_range_bases(W_float):
        Rf = la.to_float(Rb)
        pinv = np.linalg.pinv(Rf)
        Wp = pinv @ W_float @ pinv.T
        sub = [la.congruence(Rb, a) for a in mats]
        lifted = None if extra is None else (lambda X, Rb=Rb: extra(Rb @ X @ Rb.T))
        Wr = rational_sym_point(Wp, sub, rhs, want_pd=True, extra=lifted)
        if Wr is not None:
            return Rb @ Wr @ Rb.T
    return None


def rational_vector(v_float, accept, mode=Mode.EXACT):
    """First rounding of ``v_float`` (by increasing denominator) accepted by ``accept``."""
    if mode == Mode.FLOAT:
        v = np.asarray(v_float, dtype=float)
        return v if accept(v) else None
    for den in DENOMINATORS:
        v = round_array(v_float, den)
        if accept(v):
            return v
    return None
