from fractions import Fraction

import numpy as np
import pytest

from sdpnormal import linalg as la
from sdpnormal.errors import AsymmetricMatrix, ModeMismatch
from sdpnormal.linalg import Mode

from .strategies import rand_psd, rand_sym, rand_vec


def test_fraction_parsing_normalizes():
    assert la.to_fraction("2/4") == Fraction(1, 2)
    assert la.to_fraction(3) == Fraction(3)


def test_sym_rejects_asymmetric():
    with pytest.raises(AsymmetricMatrix):
        la.sym([[0, 1], [2, 0]], Mode.EXACT)


def test_mixed_modes_rejected():
    with pytest.raises(ModeMismatch):
        la.same_mode(la.eye(2, Mode.EXACT), la.eye(2, Mode.FLOAT))


def test_bullet_is_trace_product():
    rng = np.random.default_rng(0)
    for _ in range(20):
        S, T = rand_sym(rng, 3), rand_sym(rng, 3)
        assert la.bullet(S, T) == np.trace(S @ T)
        assert la.bullet_row(S) @ la.svec(T) == la.bullet(S, T)


def test_svec_smat_roundtrip():
    rng = np.random.default_rng(1)
    S = rand_sym(rng, 4)
    assert np.all(la.smat(la.svec(S), 4) == S)


def test_rank_and_nullspace():
    rng = np.random.default_rng(2)
    for _ in range(30):
        k = int(rng.integers(0, 4))
        G = np.array([[Fraction(int(rng.integers(-3, 4))) for _ in range(k)] for _ in range(4)], dtype=object)
        M = G @ np.array([[Fraction(int(rng.integers(-3, 4))) for _ in range(5)] for _ in range(k)], dtype=object) if k else la.zeros((4, 5), Mode.EXACT)
        r = la.rank(M)
        assert r == np.linalg.matrix_rank(la.to_float(M))
        N = la.nullspace(M)
        assert N.shape[1] == 5 - r
        assert la.is_zero(M @ N)


def test_solve_linear_consistent_and_inconsistent():
    M = la.matrix([[1, 1], [2, 2]], Mode.EXACT)
    x = la.solve_linear(M, la.vector([1, 2], Mode.EXACT))
    assert x is not None and np.all(M @ x == la.vector([1, 2], Mode.EXACT))
    assert la.solve_linear(M, la.vector([1, 3], Mode.EXACT)) is None


def test_inverse():
    M = la.matrix([[2, 1], [1, 1]], Mode.EXACT)
    assert np.all(M @ la.inverse(M) == la.eye(2, Mode.EXACT))


def test_psd_check_oracle():
    """Exact LDL verdict agrees with float eigenvalues on well separated instances."""
    rng = np.random.default_rng(3)
    agree = 0
    for _ in range(200):
        S = rand_sym(rng, 3) if rng.random() < 0.5 else rand_psd(rng, 3, int(rng.integers(0, 4)))
        v = la.psd_check(S)
        assert v.verify(S)
        ev = np.linalg.eigvalsh(la.to_float(S))
        if ev[0] > 1e-9:
            assert v.psd
        elif ev[0] < -1e-9:
            assert not v.psd
        agree += 1
    assert agree == 200


def test_psd_check_singular_exact():
    S = la.sym([[1, 1], [1, 1]], Mode.EXACT)
    assert la.is_psd(S) and not la.is_pd(S)
    T = la.sym([[0, 1], [1, 0]], Mode.EXACT)
    v = la.psd_check(T)
    assert not v.psd
    assert v.v @ T @ v.v < 0


def test_ldl_reconstructs():
    rng = np.random.default_rng(4)
    for _ in range(20):
        S = rand_psd(rng, 4, 2)
        v = la.psd_check(S)
        assert v.psd and v.verify(S)


def test_range_contains_matches_explicit_solve():
    rng = np.random.default_rng(5)
    for _ in range(100):
        V22 = rand_psd(rng, 2, int(rng.integers(0, 3)))
        V12T = np.column_stack([rand_vec(rng, 2) for _ in range(2)])
        inside, D = la.range_contains(V22, V12T)
        explicit = all(la.solve_linear(V22, V12T[:, j]) is not None for j in range(2))
        assert inside == explicit
        if inside:
            assert np.all(V22 @ D == V12T)


def test_congruence():
    M = la.matrix([[1, 2], [0, 1]], Mode.EXACT)
    S = la.sym([[1, 0], [0, 2]], Mode.EXACT)
    assert np.all(la.congruence(M, S) == M.T @ S @ M)


def test_primitive_scale():
    v = la.vector(["2/3", "-4/3", 0], Mode.EXACT)
    assert list(la.primitive_scale(v)) == [1, -2, 0]


def test_float_mode_psd_tolerance():
    S = la.sym([[1.0, 0.0], [0.0, -1e-14]], Mode.FLOAT)
    assert la.is_psd(S)
    assert not la.is_psd(la.sym([[1.0, 0.0], [0.0, -1e-3]], Mode.FLOAT))


def test_negative_schur_diagonal_behind_zero_pivot():
    # after eliminating the first pivot the trailing block is diag(-4/27, 0)
    S = la.sym([[3, "-2/3", 0], ["-2/3", 0, 0], [0, 0, 0]], Mode.EXACT)
    v = la.psd_check(S)
    assert not v.psd and v.verify(S)
    assert not la.is_psd(S) and not la.is_pd(S)
