from fractions import Fraction

import numpy as np
import pytest

from sdpnormal import fixtures as fx
from sdpnormal import linalg as la
from sdpnormal.certify import verify_bad, verify_good
from sdpnormal.errors import DimensionMismatch
from sdpnormal.linalg import Mode
from sdpnormal.pathology import (
    Behavior,
    check_good_condition1,
    check_good_condition2,
    construct_bad_certificate,
    good_certificate,
    lower_kernel,
    verdict,
)
from sdpnormal.system import SemidefSystem

EXPECTED = {
    "example1": Behavior.BADLY_BEHAVED,
    "example2": Behavior.BADLY_BEHAVED,
    "example3": Behavior.WELL_BEHAVED,
    "large_bad": Behavior.BADLY_BEHAVED,
    "large_good": Behavior.WELL_BEHAVED,
    "bonnans_shapiro": Behavior.BADLY_BEHAVED,
    "map1_homogeneous": Behavior.BADLY_BEHAVED,
    "map2_homogeneous": Behavior.BADLY_BEHAVED,
}


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_fixture_verdicts(name):
    v = verdict(fx.ALL[name]())
    assert v.behavior == EXPECTED[name]
    check = verify_bad if v.bad else verify_good
    assert check(v.normalized, v.certificate, v.normalized_slack.certs)


def test_needs_partition_index():
    with pytest.raises(DimensionMismatch):
        check_good_condition2(fx.example1())


def test_example1_certificate():
    v = verdict(fx.example1())
    c = v.certificate
    assert list(c.lam) == [1]
    assert np.all(c.V == la.sym([[0, 1], [1, 0]], Mode.EXACT))
    assert np.all(c.Z == la.sym([[1, 0], [0, 0]], Mode.EXACT))


def test_example3_good_with_identity():
    v = verdict(fx.example3())
    assert np.all(v.certificate.U == la.eye(2, Mode.EXACT))


def test_large_bad_lambda():
    v = verdict(fx.large_bad())
    lam = v.certificate.lam
    assert list(lam) == [0, 0, -2, 1]
    A = fx.large_bad().A
    assert np.all(v.certificate.V == A[3] - 2 * A[2])


def test_condition2_failure_gives_certificate():
    # lower block of A is zero while the off-diagonal block is not
    s = SemidefSystem.from_data([[[0, 1], [1, 0]]], [[1, 0], [0, 0]], r=1)
    c2 = check_good_condition2(s)
    assert not c2.holds and list(c2.counterexample) == [1]
    cert = construct_bad_certificate(s)
    assert cert.source == "good_condition_2"
    assert verify_bad(s, cert)


def test_condition1_failure_gives_psd_combination():
    # lower blocks diag(1,0) and diag(0,-1): every U ≻ 0 has U . diag(1,0) > 0
    A1 = [[0, 0, 1], [0, 1, 0], [1, 0, 0]]
    s = SemidefSystem.from_data([A1], [[1, 0, 0], [0, 0, 0], [0, 0, 0]], r=1)
    c1 = check_good_condition1(s)
    assert not c1.holds
    W = c1.W
    assert la.is_psd(W) and not la.is_zero(W)


def test_lower_kernel_is_kernel():
    s = verdict(fx.large_good()).normalized
    K = lower_kernel(s)
    assert K.shape[1] == 2
    for j in range(K.shape[1]):
        V = s.lhs(K[:, j])
        assert la.is_zero(V[2:, 2:])


def test_large_good_kernel_contains_published_vector():
    s = verdict(fx.large_good()).normalized
    basis = check_good_condition2(s).kernel_basis
    lam = la.vector([-2, 1, 3, 0], Mode.EXACT)
    assert la.solve_linear(np.column_stack(basis), lam) is not None


def test_certificate_kinds_exclusive_on_fixtures():
    for name in EXPECTED:
        v = verdict(fx.ALL[name]())
        s, Z = v.normalized, v.normalized_slack.Z
        if s.r == s.n:
            continue
        bad = construct_bad_certificate(s, Z)
        good = good_certificate(s, Z)
        assert (bad is None) != (good is None)


def test_float_mode_verdicts():
    for name in ("example1", "example3", "large_bad", "large_good"):
        v = verdict(fx.ALL[name]().to_float())
        assert v.behavior == EXPECTED[name]


def test_tampered_certificates_rejected():
    v = verdict(fx.example1())
    from dataclasses import replace

    bad_lam = replace(v.certificate, lam=la.vector([2], Mode.EXACT))
    assert not verify_bad(v.normalized, bad_lam)
    zero = replace(v.certificate, lam=la.vector([0], Mode.EXACT), V=la.zeros((2, 2), Mode.EXACT))
    assert not verify_bad(v.normalized, zero)
    g = verdict(fx.example3())
    notpd = replace(g.certificate, U=la.sym([[1, 0], [0, 0]], Mode.EXACT))
    assert not verify_good(g.normalized, notpd)
    wrong_r = replace(g.certificate, r=2)
    assert not verify_good(g.normalized, wrong_r)
