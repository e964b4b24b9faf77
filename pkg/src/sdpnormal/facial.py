"""Maximum-rank slacks via facial reduction, with exactly checkable certificates.

The feasible slacks of ``sum x_i A_i ⪯ B`` live in a face of the PSD cone.
We track that face as ``{P X P^T : X ⪰ 0}`` for an exact basis ``P`` and
shrink it one reducing certificate at a time.

A certificate ``Y`` for the current face ``P`` satisfies ``A_i . Y = 0``,
``B . Y = 0`` and ``P^T Y P ⪰ 0, != 0``. Every slack ``S = P X P^T`` then has
``X . (P^T Y P) = 0``, so its range lies in ``P ker(P^T Y P)``. ``Y`` itself
need not be PSD on the whole space; only its restriction to the current face
matters.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from . import rounding
from .errors import (
    CertificateRoundingFailed,
    InconsistentCertificate,
    InconsistentSlack,
    InfeasibleSystem,
)
from .linalg import Mode
from .sdp import SdpProblem, SolverConfig, Status, solve
from .system import SemidefSystem

log = logging.getLogger(__name__)

TAU_POS = 1e-7


@dataclass(frozen=True)
class ReducingCertificate:
    Y: np.ndarray


@dataclass(frozen=True)
class SlackResult:
    Z: np.ndarray
    x_Z: np.ndarray
    r: int
    certs: tuple = ()
    Q: np.ndarray | None = None


@dataclass(frozen=True)
class Check:
    """Boolean outcome that remembers which check failed."""

    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


# ---------------------------------------------------------------- helpers


def _vec_cols(M: np.ndarray) -> np.ndarray:
    return M.reshape(-1, order="F")


def _face_linear_part(sys: SemidefSystem, N: np.ndarray):
    """Solutions of ``(B - sum x_i A_i) N = 0`` as ``x0 + K z`` (``None`` if empty)."""
    mode = sys.mode
    m = sys.m
    if N.shape[1] == 0:
        return la.zeros(m, mode), la.eye(m, mode)
    M = np.column_stack([_vec_cols(a @ N) for a in sys.A])
    rhs = _vec_cols(sys.B @ N)
    x0 = la.solve_linear(M, rhs)
    if x0 is None:
        return None, None
    return x0, la.nullspace(M)


def _reducer(P: np.ndarray):
    """``H`` with ``S == P (H S H^T) P^T`` whenever ``S`` vanishes on ``P``'s complement."""
    G = P.T @ P
    return la.inverse(G) @ P.T


def _sym_basis_off_face(P: np.ndarray, N: np.ndarray):
    """Basis of ``{T symmetric : P^T T P = 0}``."""
    mode = la.mode_of(P)
    out = []
    k, q = P.shape[1], N.shape[1]
    for a in range(k):
        for b in range(q):
            u = np.outer(P[:, a], N[:, b])
            out.append(u + u.T)
    for a in range(q):
        for b in range(a, q):
            u = np.outer(N[:, a], N[:, b])
            out.append(u + u.T if a != b else u)
    return out


def _lift(sys: SemidefSystem, H: np.ndarray, P: np.ndarray, N: np.ndarray, W: np.ndarray, b_value):
    """Full ``Y = H^T W H + T`` with ``A_i . Y = 0`` and ``B . Y = b_value``."""
    mode = sys.mode
    Y0 = H.T @ W @ H
    basis = _sym_basis_off_face(P, N)
    targets = [la.zero(mode) for _ in sys.A] + [b_value]
    mats = list(sys.A) + [sys.B]
    rhs = np.array([t - la.bullet(a, Y0) for a, t in zip(mats, targets)], dtype=Y0.dtype)
    if not basis:
        if all(_is_zero_scalar(v) for v in rhs):
            return la.frozen(Y0)
        raise InconsistentCertificate("reduced certificate does not lift to the full space")
    M = np.array([[la.bullet(a, t) for t in basis] for a in mats], dtype=Y0.dtype)
    if mode == Mode.FLOAT:
        coef = np.linalg.lstsq(M, rhs, rcond=None)[0]
        if np.linalg.norm(M @ coef - rhs) > 1e-6 * (1.0 + np.linalg.norm(rhs)):
            coef = None
    else:
        coef = la.solve_linear(M, rhs)
    if coef is None:
        raise InconsistentCertificate("reduced certificate does not lift to the full space")
    Y = Y0 + la.linear_combination(coef, basis, mode, sys.n)
    if mode == Mode.FLOAT:
        Y = (Y + Y.T) / 2
    return la.frozen(Y)


def _is_zero_scalar(v) -> bool:
    if isinstance(v, float):
        return abs(v) <= la.TAU_RANK
    return v == 0


def _independent(mats, mode):
    if not mats:
        return []
    M = np.column_stack([la.svec(a) for a in mats])
    return list(la.rref(M)[1])


# ---------------------------------------------------------------- probe


@dataclass
class _Probe:
    t: float
    tau: float
    z: np.ndarray
    W: np.ndarray | None
    omega: float
    status: Status


def _slater_probe(Bt, At, cfg: SolverConfig) -> _Probe:
    """Solve ``sup t`` s.t. ``tau Bt - sum z_j At_j ⪰ t I``, ``tau ⪰ t``,
    ``trace(tau Bt - sum z_j At_j) + tau = 1`` (the last one eliminated)."""
    k = Bt.shape[0]
    q = len(At)
    Bf = la.to_float(Bt)
    Af = [la.to_float(a) for a in At]
    hats = []
    hats.append(-_bd(Bf, 1.0))
    hats.extend(_bd(a, 0.0) for a in Af)
    ell = [float(np.trace(Bf)) + 1.0] + [-float(np.trace(a)) for a in Af]
    p = int(np.argmax(np.abs(ell)))
    lp = ell[p]
    t_hat = _bd(np.eye(k), 1.0)
    Bhat = -hats[p] / lp
    free = [i for i in range(q + 1) if i != p]
    mats = [hats[i] - (ell[i] / lp) * hats[p] for i in free] + [t_hat]
    c = [0.0] * len(free) + [1.0]
    sys = SemidefSystem(tuple(mats), Bhat)
    sol = solve(SdpProblem(sys, tuple(c)), cfg)
    v = np.zeros(q + 1)
    v[free] = sol.x[:-1]
    v[p] = (1.0 - sum(ell[i] * v[i] for i in free)) / lp
    Y = sol.Y
    return _Probe(float(sol.x[-1]), float(v[0]), v[1:], Y[:k, :k], float(Y[k, k]), sol.status)


def _bd(X, s):
    k = X.shape[0]
    out = np.zeros((k + 1, k + 1))
    out[:k, :k] = X
    out[k, k] = s
    return out


# ---------------------------------------------------------------- main loop


def max_rank_slack(sys: SemidefSystem, cfg: SolverConfig | None = None) -> SlackResult:
    """Facial reduction: a slack of maximal rank plus its certificate chain.

    Raises :class:`InfeasibleSystem` when no slack exists and
    :class:`CertificateRoundingFailed` when a floating-point certificate
    cannot be turned into an exactly verified one.
    """
    cfg = cfg or SolverConfig()
    if sys.mode == Mode.FLOAT:
        return _float_via_exact(sys, cfg)
    mode = sys.mode
    n = sys.n
    P = la.eye(n, mode)
    certs = []
    for _ in range(n + 1):
        k = P.shape[1]
        N = la.nullspace(P.T) if k < n else la.zeros((n, 0), mode)
        x0, K = _face_linear_part(sys, N)
        if x0 is None:
            raise InfeasibleSystem("no slack vanishes outside the current face", face=P)
        if k == 0:
            return _finish(sys, x0, certs)
        H = _reducer(P)
        Bt = la.congruence(H.T, sys.slack(x0))
        Kmats = [la.linear_combination(K[:, j], sys.A, mode, n) for j in range(K.shape[1])]
        At_all = [la.congruence(H.T, a) for a in Kmats]
        sel = _independent(At_all, mode)
        At = [At_all[j] for j in sel]
        Ksel = K[:, sel] if sel else la.zeros((sys.m, 0), mode)

        ell_tau = np.trace(Bt) + 1
        if all(np.trace(a) == 0 for a in At) and _is_zero_scalar(ell_tau):
            # every normalized point has zero slack and tau = 0
            raise InfeasibleSystem("trace argument rules out any slack", la.eye(k, mode), P)

        step = _reduce_once(sys, P, N, H, x0, Ksel, Bt, At, cfg)
        if isinstance(step, np.ndarray):  # interior point of the face found
            return _finish(sys, step, certs)
        W, Y = step
        if mode == Mode.EXACT:
            Y = la.frozen(la.primitive_scale(Y))
        certs.append(ReducingCertificate(Y))
        ker = la.nullspace(W)
        log.debug("facial reduction: face dimension %d -> %d", k, ker.shape[1])
        if ker.shape[1] >= k:
            raise InconsistentCertificate("certificate did not shrink the face")
        P = P @ ker
    raise InconsistentCertificate("facial reduction did not terminate")


def _reduce_once(sys, P, N, H, x0, Ksel, Bt, At, cfg):
    mode = sys.mode
    k = P.shape[1]
    tighter = SolverConfig(tol=cfg.tol * 1e-2, max_iter=cfg.max_iter * 2, step_fraction=cfg.step_fraction)
    for attempt in (cfg, tighter):
        probe = _slater_probe(Bt, At, attempt)
        log.debug("slater probe: t=%.3e tau=%.3e omega=%.3e status=%s", probe.t, probe.tau, probe.omega, probe.status.value)
        if probe.status == Status.OPTIMAL and probe.t > TAU_POS and probe.tau > TAU_POS:
            y_f = probe.z / probe.tau

            def interior(y):
                X = Bt - la.linear_combination(y, At, mode, k)
                return la.is_pd(X)

            y = rounding.rational_vector(y_f, interior, mode)
            if y is not None:
                return x0 + (Ksel @ y if len(y) else la.zeros(sys.m, mode))
            continue
        if probe.W is None:
            continue
        W_f = probe.W / max(np.trace(probe.W), 1e-300)
        eye_k = la.eye(k, mode)
        one = la.one(mode)
        zero = la.zero(mode)
        attempts = [("reduce", list(At) + [Bt, eye_k], [zero] * len(At) + [zero, one])]
        infeas = ("infeasible", list(At) + [eye_k], [zero] * len(At) + [one])
        if probe.omega > 1e-6:
            attempts.insert(0, infeas)
        else:
            attempts.append(infeas)
        def negative_on_b(X):
            bx = la.bullet(Bt, X)
            return bx < 0 and not _is_zero_scalar(bx)

        for kind, mats, rhs in attempts:
            extra = negative_on_b if kind == "infeasible" else None
            W = rounding.rational_sym_point(W_f, mats, rhs, mode=mode, extra=extra)
            if W is None:
                continue
            if kind == "infeasible":
                raise InfeasibleSystem("reduced system admits no slack", W, P)
            Y = _lift(sys, H, P, N, W, la.zero(mode))
            return W, Y
    raise CertificateRoundingFailed(
        f"could not certify the face of dimension {k}: no verified interior point or reducing certificate"
    )


def _binary_rational(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = Fraction(float(v))
    return out


def _float_via_exact(sys: SemidefSystem, cfg) -> SlackResult:
    # every double is a dyadic rational, so the exact pipeline applies verbatim
    exact = SemidefSystem(tuple(_binary_rational(a) for a in sys.A), _binary_rational(sys.B), sys.r)
    res = max_rank_slack(exact, cfg)
    Z = la.frozen(la.to_float(res.Z))
    certs = tuple(ReducingCertificate(la.frozen(la.to_float(c.Y))) for c in res.certs)
    return SlackResult(Z, la.frozen(la.to_float(res.x_Z)), res.r, certs, la.frozen(normalizing_congruence(Z)))


def _finish(sys, x, certs) -> SlackResult:
    Z = la.frozen(sys.slack(x))
    r = la.rank(Z)
    return SlackResult(Z, la.frozen(np.asarray(x)), r, tuple(certs), la.frozen(normalizing_congruence(Z)))


# ---------------------------------------------------------------- verification


def verify_max_rank(sys: SemidefSystem, Z, certs) -> Check:
    """Exact check that ``Z`` is a slack of maximal rank, given a certificate chain."""
    mode = sys.mode
    n = sys.n
    Z = np.asarray(Z)
    if Z.shape != (n, n):
        return Check(False, "Z has the wrong shape")
    if la.mode_of(Z) != mode:
        return Check(False, "Z and the system use different scalar modes")
    if la.solve_membership(sys.B - Z, sys.A) is None:
        return Check(False, "Z is not of the form B - sum x_i A_i")
    if not la.is_psd(Z):
        return Check(False, "Z is not positive semidefinite")
    P = la.eye(n, mode)
    for j, c in enumerate(certs):
        Y = c.Y if isinstance(c, ReducingCertificate) else np.asarray(c)
        if Y.shape != (n, n) or la.mode_of(Y) != mode:
            return Check(False, f"certificate {j} has the wrong shape or mode")
        for i, a in enumerate(sys.A):
            if not _is_zero_scalar(la.bullet(a, Y)):
                return Check(False, f"certificate {j} is not orthogonal to A[{i}]")
        if not _is_zero_scalar(la.bullet(sys.B, Y)):
            return Check(False, f"certificate {j} is not orthogonal to B")
        M = P.T @ Y @ P
        if mode == Mode.FLOAT:
            M = (M + M.T) / 2
        if la.is_zero(M):
            return Check(False, f"certificate {j} vanishes on the current face")
        if not la.is_psd(M):
            return Check(False, f"certificate {j} is not PSD on the current face")
        P = P @ la.nullspace(M)
    if la.rank(Z) != P.shape[1]:
        return Check(False, f"rank(Z) = {la.rank(Z)} but the certificates only bound it by {P.shape[1]}")
    return Check(True)


# ---------------------------------------------------------------- normalization


def _is_normalized(Z, r, mode) -> bool:
    n = Z.shape[0]
    for i in range(n):
        for j in range(n):
            v = Z[i, j]
            if i == j and i < r:
                ok = v > 0 if mode == Mode.EXACT else (v > 0 and abs(v - 1.0) <= 1e-12)
            else:
                ok = _is_zero_scalar(v)
            if not ok:
                return False
    return True


def normalizing_congruence(Z: np.ndarray) -> np.ndarray:
    """``Q`` with ``Q^T Z Q = diag(D, 0)``.

    Exact input gives a positive diagonal ``D`` without square roots; float
    input gives ``D = I``. An already normalized ``Z`` yields ``Q = I``.
    """
    mode = la.mode_of(Z)
    n = Z.shape[0]
    r = la.rank(Z)
    if _is_normalized(Z, r, mode):
        return la.eye(n, mode)
    if mode == Mode.EXACT:
        perm, L, d, failure = la.ldl_pivoted(Z)
        if failure is not None:
            raise InconsistentSlack("slack is not positive semidefinite")
        F = la.zeros((n, n), mode)
        for i in range(n):
            F[perm[i]] = L[i]
        return la.inverse(F).T
    w, U = np.linalg.eigh(Z)
    order = np.argsort(-w)
    w, U = w[order], U[:, order]
    scale = np.ones(n)
    scale[:r] = 1.0 / np.sqrt(w[:r])
    return U * scale


def normalize_assumption1(sys: SemidefSystem, slack: SlackResult):
    """Congruence-transform ``sys`` so its maximum-rank slack is ``diag(D, 0)``.

    Returns ``(normalized system with r set, Q)``.
    """
    check = verify_max_rank(sys, slack.Z, slack.certs)
    if not check:
        raise InconsistentSlack(f"slack failed verification: {check.reason}")
    Q = slack.Q if slack.Q is not None else normalizing_congruence(slack.Z)
    A = tuple(la.congruence(Q, a) for a in sys.A)
    B = la.congruence(Q, sys.B)
    return SemidefSystem(A, B, slack.r), Q


def transform_slack(slack: SlackResult, Q: np.ndarray) -> SlackResult:
    """Express a slack result in the coordinates ``S -> Q^T S Q``."""
    mode = la.mode_of(Q)
    n = Q.shape[0]
    Qi = la.inverse(Q)
    certs = tuple(ReducingCertificate(la.congruence(Qi.T, c.Y)) for c in slack.certs)
    return SlackResult(la.congruence(Q, slack.Z), slack.x_Z, slack.r, certs, la.eye(n, mode))


# ---------------------------------------------------------------- solving on the minimal face


@dataclass(frozen=True)
class FaceSolution:
    """Optimal value of ``sup c^T x`` computed on the minimal face.

    ``status`` is a :class:`Status`; ``x`` is a near-optimal point in the
    original variables (float) when the value is finite.
    """

    value: float
    status: Status
    x: np.ndarray | None
    slack: SlackResult


def solve_on_minimal_face(sys: SemidefSystem, c, cfg: SolverConfig | None = None) -> FaceSolution:
    """``sup c^T x`` over ``sum x_i A_i ⪯ B`` after restricting to the minimal face.

    The restricted problem satisfies Slater's condition, so its optimal
    value is computed reliably even when the original problem is degenerate.
    """
    cfg = cfg or SolverConfig()
    if sys.mode == Mode.FLOAT:
        sys = SemidefSystem(tuple(_binary_rational(a) for a in sys.A), _binary_rational(sys.B))
        c = [Fraction(float(v)) for v in c]
    mode = sys.mode
    c = np.array([la.to_fraction(v) for v in c], dtype=object)
    slack = max_rank_slack(sys, cfg)
    n = sys.n
    range_basis = la.nullspace(slack.Z) if slack.r < n else la.zeros((n, 0), mode)
    x0, K = _face_linear_part(sys, range_basis)
    P = la.nullspace(range_basis.T) if range_basis.shape[1] else la.eye(n, mode)
    H = _reducer(P)
    Bt = la.congruence(H.T, sys.slack(x0))
    At_all = [la.congruence(H.T, la.linear_combination(K[:, j], sys.A, mode, n)) for j in range(K.shape[1])]
    cK = K.T @ c if K.shape[1] else la.zeros(0, mode)
    base = float(c @ x0)
    if At_all:
        M = np.column_stack([la.svec(a) for a in At_all])
        ker = la.nullspace(M)
        for j in range(ker.shape[1]):
            if cK @ ker[:, j] != 0:
                return FaceSolution(float("inf"), Status.UNBOUNDED_ABOVE, None, slack)
        sel = list(la.rref(M)[1])
    else:
        sel = []
    if not sel:
        return FaceSolution(base, Status.OPTIMAL, la.to_float(x0), slack)
    red = SemidefSystem(tuple(At_all[j] for j in sel), Bt)
    sol = solve(SdpProblem(red, tuple(cK[j] for j in sel)), cfg)
    x = la.to_float(x0) + la.to_float(K[:, sel]) @ sol.x
    return FaceSolution(base + float(sol.primal_value), sol.status, x, slack)


def dual_as_system(sys: SemidefSystem, c):
    """The dual ``inf B . Y, A_i . Y = c_i, Y ⪰ 0`` as an inequality system.

    Returns ``(lmi, objective, constant, Y0, N)`` with ``Y = Y0 + sum w_j N_j``
    and ``inf B . Y == constant - sup objective^T w`` over ``lmi``; ``None``
    when the equality constraints are inconsistent.
    """
    mode, n = sys.mode, sys.n
    M = np.array([la.bullet_row(a) for a in sys.A], dtype=sys.B.dtype)
    cv = np.array([la.to_fraction(v) if mode == Mode.EXACT else float(v) for v in c], dtype=sys.B.dtype)
    y0 = la.solve_linear(M, cv)
    if y0 is None:
        return None
    Nb = la.nullspace(M)
    Y0 = la.smat(y0, n)
    N = [la.smat(Nb[:, j], n) for j in range(Nb.shape[1])]
    mats = [-Nj for Nj in N] or [la.zeros((n, n), mode)]
    obj = [-la.bullet(sys.B, Nj) for Nj in N] or [la.zero(mode)]
    return SemidefSystem(tuple(mats), Y0), obj, la.bullet(sys.B, Y0), Y0, N


def dual_value_on_minimal_face(sys: SemidefSystem, c, cfg: SolverConfig | None = None) -> FaceSolution:
    """Optimal value of the dual SDP, computed on the minimal face of its feasible set."""
    out = dual_as_system(sys, c)
    if out is None:
        raise InfeasibleSystem("dual equality constraints are inconsistent")
    lmi, obj, const, _, _ = out
    res = solve_on_minimal_face(lmi, obj, cfg)
    value = float(const) - res.value
    status = Status.PRIMAL_INFEASIBLE if res.status == Status.UNBOUNDED_ABOVE else res.status
    return FaceSolution(value, status, res.x, res.slack)
