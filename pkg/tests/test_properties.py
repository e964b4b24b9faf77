"""Exclusivity of bad and good certificates, and invariance under reformulation."""

from fractions import Fraction

import numpy as np
import pytest

from sdpnormal import fixtures as fx
from sdpnormal.certify import verify_bad, verify_good
from sdpnormal.pathology import construct_bad_certificate, good_certificate, verdict
from sdpnormal.system import Congruence, Replace, ShiftB, Swap, record

from .strategies import rand_invertible

NAMES = sorted(fx.ALL)
SCRAMBLES = 200


def _small_steps(rng, sys, k):
    """Random elementary reformulations with small integer coefficients."""
    steps = []
    m, n, r = sys.m, sys.n, sys.r
    for _ in range(k):
        kind = int(rng.integers(0, 4))
        if kind == 0 and r is not None and n - r:
            steps.append(Congruence(rand_invertible(rng, n - r)))
        elif kind == 1:
            steps.append(ShiftB(tuple(Fraction(int(v)) for v in rng.integers(-1, 2, m))))
        elif kind == 2 and m > 1:
            i, j = rng.choice(m, 2, replace=False)
            steps.append(Swap(int(i), int(j)))
        else:
            i = int(rng.integers(0, m))
            lam = [Fraction(int(v)) for v in rng.integers(-1, 2, m)]
            lam[i] = Fraction(int(rng.choice([-1, 1])))
            steps.append(Replace(i, tuple(lam)))
    return steps


def _exactly_one_verifies(v):
    s, Z, certs = v.normalized, v.normalized_slack.Z, v.normalized_slack.certs
    if s.r == s.n:
        # Slater: no bad certificate can exist, the trivial good one verifies
        return v.certificate is not None and not v.bad and bool(verify_good(s, v.certificate, certs))
    bad = construct_bad_certificate(s, Z)
    good = good_certificate(s, Z)
    ok_bad = bad is not None and bool(verify_bad(s, bad, certs))
    ok_good = good is not None and bool(verify_good(s, good, certs))
    return ok_bad != ok_good and ok_bad == v.bad


@pytest.mark.parametrize("name", NAMES)
def test_exclusive_on_fixtures(name):
    assert _exactly_one_verifies(verdict(fx.ALL[name]()))


def test_exclusive_and_invariant_under_scrambles():
    rng = np.random.default_rng(61)
    base = {name: verdict(fx.ALL[name]()) for name in NAMES}
    for t in range(SCRAMBLES):
        name = NAMES[(t // 2) % len(NAMES)]
        v0 = base[name]
        # even rounds scramble the normalized system, where restricted congruences apply
        src = v0.normalized if t % 2 == 0 else fx.ALL[name]()
        _, scrambled = record(src, _small_steps(rng, src, int(rng.integers(1, 6))))
        v = verdict(scrambled)
        assert v.behavior == v0.behavior, (name, t)
        assert v.slack.r == v0.slack.r
        assert _exactly_one_verifies(v), (name, t)
