"""Random rational data for property tests."""

from fractions import Fraction

import numpy as np

from sdpnormal import linalg as la
from sdpnormal.linalg import Mode


def rat(rng, lo=-3, hi=3, dens=(1, 2, 3)):
    return Fraction(int(rng.integers(lo, hi + 1)), int(rng.choice(dens)))


def rand_sym(rng, n, lo=-3, hi=3):
    S = la.zeros((n, n), Mode.EXACT)
    for i in range(n):
        for j in range(i, n):
            S[i, j] = S[j, i] = rat(rng, lo, hi)
    return S


def rand_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    G = np.array([[rat(rng) for _ in range(rank)] for _ in range(n)], dtype=object)
    return G @ G.T if rank else la.zeros((n, n), Mode.EXACT)


def rand_invertible(rng, n):
    while True:
        M = np.array([[Fraction(int(rng.integers(-2, 3))) for _ in range(n)] for _ in range(n)], dtype=object)
        if la.rank(M) == n:
            return M


def rand_vec(rng, m, lo=-3, hi=3):
    return np.array([rat(rng, lo, hi) for _ in range(m)], dtype=object)
