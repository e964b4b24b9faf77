from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from sdpnormal import fixtures as fx
from sdpnormal import linalg as la
from sdpnormal.errors import DimensionMismatch, InfeasiblePoint
from sdpnormal.facial import dual_value_on_minimal_face, solve_on_minimal_face
from sdpnormal.linalg import Mode
from sdpnormal.sdp import SdpProblem, Status, check_weak_duality, solve
from sdpnormal.system import SemidefSystem

from .strategies import rand_psd, rand_sym, rand_vec


def test_reduced_good_problem():
    sol = solve(SdpProblem(fx.large_good_reduced(), (0, 2)))
    assert sol.status == Status.OPTIMAL
    assert abs(sol.primal_value - 1) < 1e-6
    assert abs(sol.dual_value - 1) < 1e-6
    assert np.allclose(sol.x, [-0.5, 0.5], atol=1e-4)
    assert np.allclose(sol.Y, [[1, 0], [0, 0]], atol=1e-4)


def test_zero_objective_value_zero():
    s = SemidefSystem.from_data([[[1, 0], [0, -1]]], [[1, 0], [0, 1]])
    sol = solve(SdpProblem(s, (0,)))
    assert sol.status == Status.OPTIMAL and abs(sol.primal_value) < 1e-7


def test_unbounded_detected():
    s = SemidefSystem.from_data([[[-1, 0], [0, -1]]], [[1, 0], [0, 1]])
    sol = solve(SdpProblem(s, (1,)))
    assert sol.status in (Status.UNBOUNDED_ABOVE, Status.NUMERICAL_LIMIT)
    assert sol.status != Status.OPTIMAL


def test_objective_length_checked():
    with pytest.raises(DimensionMismatch):
        SdpProblem(fx.example1(), (1, 2))


def test_pathological_input_never_claims_wrong_optimum():
    sol = solve(SdpProblem(fx.example2(), (0, 1)))
    if sol.status == Status.OPTIMAL:
        assert abs(sol.dual_value - 1) < 1e-6


def test_example2_gap_on_minimal_faces():
    s = fx.example2()
    assert solve_on_minimal_face(s, (0, 1)).value == 0.0
    assert abs(dual_value_on_minimal_face(s, (0, 1)).value - 1) < 1e-6


def test_weak_duality_examples():
    s = fx.large_good_reduced()
    p = SdpProblem(s, (0, 2))
    assert check_weak_duality(p, ["-1/2", "1/2"], [[1, 0], [0, 0]]) == 0
    e1 = SdpProblem(fx.example1(), (0,))
    eps = Fraction(1, 7)
    assert check_weak_duality(e1, [0], [[eps, 0], [0, 0]]) == eps
    with pytest.raises(InfeasiblePoint):
        check_weak_duality(SdpProblem(fx.example1(), (1,)), [0], [[0, 0], [0, 0]])


def _t_max(Bf, M):
    """Largest t with B - t M ⪰ 0 for B ≻ 0."""
    Li = np.linalg.inv(np.linalg.cholesky(Bf))
    lam = np.linalg.eigvalsh(Li @ M @ Li.T)[-1]
    return np.inf if lam <= 0 else 1.0 / lam


def _grid_oracle(sys, c):
    """Maximize c^T x by a dense polar grid over the (star-shaped) feasible region."""
    A = [la.to_float(a) for a in sys.A]
    Bf = la.to_float(sys.B)
    c = np.array([float(v) for v in c])
    if len(A) == 1:
        best = 0.0
        for s in (1.0, -1.0):
            if s * c[0] > 0:
                best = max(best, _t_max(Bf, s * A[0]) * s * c[0])
        return best

    def f(th):
        d = np.array([np.cos(th), np.sin(th)])
        cd = c @ d
        if cd <= 0:
            return 0.0
        return _t_max(Bf, d[0] * A[0] + d[1] * A[1]) * cd

    grid = np.linspace(0, 2 * np.pi, 20001)
    vals = np.array([f(t) for t in grid])
    k = int(np.argmax(vals))
    h = grid[1] - grid[0]
    res = minimize_scalar(lambda t: -f(t), bounds=(grid[k] - h, grid[k] + h), method="bounded", options={"xatol": 1e-12})
    return max(vals[k], -res.fun)


def test_solver_agrees_with_grid_oracle():
    """50 random 2x2 instances with Slater points on both sides."""
    rng = np.random.default_rng(21)
    done = 0
    while done < 50:
        m = int(rng.integers(1, 3))
        A = tuple(rand_sym(rng, 2) for _ in range(m))
        B = rand_psd(rng, 2) + la.eye(2, Mode.EXACT)
        Y0 = rand_psd(rng, 2) + la.eye(2, Mode.EXACT) * Fraction(1, 2)
        c = tuple(la.bullet(a, Y0) for a in A)
        sys = SemidefSystem(A, B)
        sol = solve(SdpProblem(sys, c))
        assert sol.status == Status.OPTIMAL
        oracle = _grid_oracle(sys, c)
        assert abs(sol.primal_value - oracle) <= 1e-4 * (1 + abs(oracle))
        done += 1


def test_weak_duality_random_pairs():
    """Gap B.Y - c^T x >= 0, exactly, on 500 random feasible pairs."""
    rng = np.random.default_rng(22)
    for _ in range(500):
        n = int(rng.integers(2, 4))
        m = int(rng.integers(1, 4))
        A = tuple(rand_sym(rng, n) for _ in range(m))
        B = rand_psd(rng, n) + la.eye(n, Mode.EXACT)
        sys = SemidefSystem(A, B)
        x = rand_vec(rng, m)
        while not la.is_psd(sys.slack(x)):
            x = x / 2
        Y = rand_psd(rng, n, int(rng.integers(0, n + 1)))
        c = tuple(la.bullet(a, Y) for a in A)
        gap = check_weak_duality(SdpProblem(sys, c), x, Y)
        assert gap >= 0
        assert gap == la.bullet(sys.slack(x), Y)


def test_solutions_reverify():
    sol = solve(SdpProblem(fx.large_good_reduced(), (0, 2)))
    S = fx.large_good_reduced().to_float().slack(sol.x)
    assert la.min_eig(S) > -1e-7
    assert la.min_eig(la.sym(sol.Y, Mode.FLOAT)) > -1e-7
