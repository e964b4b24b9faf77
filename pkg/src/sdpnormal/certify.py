"""Independent checks for bad and good certificates.

Only scalar linear algebra and the maximum-rank verifier are used here, so
a bug in the constructors cannot make their own output pass.
"""

from __future__ import annotations

import numpy as np

from . import linalg as la
from .facial import Check, verify_max_rank
from .linalg import Mode


def _zero(v) -> bool:
    return abs(v) <= la.TAU_RANK if isinstance(v, float) else v == 0


def _slack_shape_ok(Z, r, mode) -> bool:
    n = Z.shape[0]
    for i in range(n):
        for j in range(n):
            v = Z[i, j]
            if i == j and i < r:
                if not v > 0:
                    return False
            elif not _zero(v):
                return False
    return True


def _check_slack(sys, Z, r, certs) -> Check:
    if np.asarray(Z).shape != (sys.n, sys.n):
        return Check(False, f"Z has shape {np.asarray(Z).shape}, expected {(sys.n, sys.n)}")
    if sys.r != r:
        return Check(False, f"certificate partition r={r} differs from the system's r={sys.r}")
    if not _slack_shape_ok(np.asarray(Z), r, sys.mode):
        return Check(False, "Z is not of the form diag(D, 0) with D positive diagonal")
    if certs is None:
        return Check(True)
    return verify_max_rank(sys, Z, certs)


def verify_bad(sys, cert, certs=None) -> Check:
    """Re-derive every claim of a bad certificate.

    ``certs`` (reducing certificates in the same coordinates) additionally
    re-proves that ``Z`` has maximal rank.
    """
    if cert is None:
        return Check(False, "no certificate")
    r = cert.r
    chk = _check_slack(sys, cert.Z, r, certs)
    if not chk:
        return chk
    if len(cert.lam) != sys.m:
        return Check(False, "lambda has the wrong length")
    V = la.linear_combination(cert.lam, sys.A, sys.mode, sys.n)
    if np.asarray(cert.V).shape != V.shape:
        return Check(False, "V has the wrong shape")
    if not bool(np.all(V == cert.V)) if sys.mode == Mode.EXACT else not np.allclose(V, cert.V, atol=1e-10):
        return Check(False, "V is not the stated combination of the A_i")
    if la.is_zero(cert.lam):
        return Check(False, "lambda is zero")
    V12 = V[:r, r:]
    V22 = V[r:, r:]
    w = la.psd_check(V22)
    if not w.psd or not w.verify(V22):
        return Check(False, "V22 is not positive semidefinite")
    inside, _ = la.range_contains(V22, V12.T)
    if inside:
        return Check(False, "range(V12^T) is contained in range(V22)")
    col = V12.T[:, cert.column]
    if la.solve_linear(V22, col) is not None:
        return Check(False, f"stated column {cert.column} of V12^T lies in range(V22)")
    return Check(True)


def verify_good(sys, cert, certs=None) -> Check:
    """Re-derive both good conditions from a good certificate."""
    if cert is None:
        return Check(False, "no certificate")
    r = cert.r
    chk = _check_slack(sys, cert.Z, r, certs)
    if not chk:
        return chk
    n, m, mode = sys.n, sys.m, sys.mode
    q = n - r
    U = cert.U
    if U.shape != (q, q):
        return Check(False, "U has the wrong size")
    if q and not la.is_pd(U):
        return Check(False, "U is not positive definite")
    for i, a in enumerate(sys.A):
        if not _zero(la.bullet(a[r:, r:], U)):
            return Check(False, f"U is not orthogonal to the lower-right block of A[{i}]")
    basis = list(cert.kernel_basis)
    for k, lam in enumerate(basis):
        V = la.linear_combination(lam, sys.A, mode, n)
        if not la.is_zero(V[r:, r:]):
            return Check(False, f"kernel vector {k} does not annihilate the lower-right blocks")
        if not la.is_zero(V[:r, r:]):
            return Check(False, f"kernel vector {k} has a nonzero off-diagonal block")
    # the basis must span the whole kernel
    if q:
        lows = np.column_stack([la.svec(a[r:, r:]) for a in sys.A])
        dim = m - la.rank(lows)
    else:
        dim = m
    got = la.rank(np.column_stack(basis)) if basis else 0
    if got != len(basis) or got != dim:
        return Check(False, f"kernel basis has rank {got}, kernel dimension is {dim}")
    return Check(True)
