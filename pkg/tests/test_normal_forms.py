import numpy as np
import pytest

from sdpnormal import fixtures as fx
from sdpnormal import linalg as la
from sdpnormal.errors import InconsistentCertificate, Unbounded
from sdpnormal.linalg import Mode
from sdpnormal.normal_forms import (
    GoodNormalForm,
    bad_objective,
    complete_dual_solution,
    to_bad_normal_form,
    to_good_normal_form,
    verify_bad_normal_form,
    verify_bad_objective,
    verify_good_normal_form,
)
from sdpnormal.pathology import verdict
from sdpnormal.sdp import SdpProblem, check_weak_duality
from sdpnormal.system import SemidefSystem, apply_trace, record, shift_b

BAD = ["example1", "example2", "large_bad", "bonnans_shapiro", "map1_homogeneous", "map2_homogeneous"]
GOOD = ["example3", "large_good"]


def _nf(name, trace=None):
    v = verdict(fx.ALL[name]())
    make = to_bad_normal_form if v.bad else to_good_normal_form
    return v, make(v.normalized, v.certificate, v.slack.x_Z, trace)


@pytest.mark.parametrize("name", BAD)
def test_bad_normal_forms_verify_and_are_equivalent(name):
    v, nf = _nf(name)
    assert verify_bad_normal_form(nf)
    assert apply_trace(v.normalized, nf.trace).equals(nf.system)
    assert np.all(nf.system.B == v.normalized_slack.Z)


@pytest.mark.parametrize("name", GOOD)
def test_good_normal_forms_verify_and_are_equivalent(name):
    v, nf = _nf(name)
    assert verify_good_normal_form(nf)
    assert apply_trace(v.normalized, nf.trace).equals(nf.system)


def test_small_examples_already_in_normal_form():
    for name in ("example1", "example2"):
        v, nf = _nf(name)
        assert len(nf.trace) == 0


def test_supplied_trace_gives_published_forms():
    _, nf = _nf("large_bad", fx.large_example_trace())
    assert nf.system.equals(fx.large_bad_reformulated()) and nf.k == 2
    _, nf = _nf("large_good", fx.large_example_trace())
    assert nf.system.equals(fx.large_good_reformulated()) and nf.k == 2


def test_wrong_certificate_rejected():
    v1 = verdict(fx.example1())
    v3 = verdict(fx.example3())
    with pytest.raises(InconsistentCertificate):
        to_bad_normal_form(v3.normalized, v1.certificate)


def test_trace_breaking_the_form_rejected():
    v = verdict(fx.large_bad())
    trace, _ = record(v.normalized, [shift_b([1, 0, 0, 0])])
    with pytest.raises(InconsistentCertificate):
        to_bad_normal_form(v.normalized, v.certificate, v.slack.x_Z, trace)


def test_verify_bad_normal_form_flags_broken_condition():
    _, nf = _nf("large_bad", fx.large_example_trace())
    A = list(nf.system.A)
    A[0] = A[0].copy()
    A[0][0, 3] = A[0][3, 0] = 1
    broken = type(nf)(SemidefSystem(tuple(A), nf.system.B, nf.system.r), nf.k, nf.trace)
    chk = verify_bad_normal_form(broken)
    assert not chk and chk.reason


@pytest.mark.parametrize("name", BAD)
def test_bad_objective(name):
    _, nf = _nf(name)
    obj = bad_objective(nf)
    assert verify_bad_objective(nf, obj)
    assert obj.optimum == 0
    # the pulled-back objective agrees with the normal-form one
    from sdpnormal.system import variable_map

    L, d = variable_map(nf.trace, nf.system.m, Mode.EXACT)
    rng = np.random.default_rng(41)
    for _ in range(3):
        x = np.array([la.to_fraction(int(t)) for t in rng.integers(-3, 4, nf.system.m)], dtype=object)
        assert obj.c_normal @ x == obj.c_source @ (L @ x + d) + obj.offset


def test_dual_completion_published_instance():
    _, nf = _nf("large_good", fx.large_example_trace())
    dc = complete_dual_solution(nf, [0, 2, 5, 7])
    assert dc.exact and dc.value == 1
    Y = dc.Y
    assert np.all(Y[:2, :2] == la.sym([[1, 0], [0, 0]], Mode.EXACT))
    assert np.all(Y[2:, 2:] == la.sym([[0, 1], [1, 0]], Mode.EXACT) + dc.lam * la.eye(2, Mode.EXACT))
    assert dc.lam >= 1
    assert check_weak_duality(SdpProblem(nf.system, (0, 2, 5, 7)), dc.x, Y) == 0


def test_dual_completion_zero_objective():
    _, nf = _nf("large_good", fx.large_example_trace())
    dc = complete_dual_solution(nf, [0, 0, 0, 0])
    assert dc.value == 0 and la.is_zero(dc.Y)
    _, nf3 = _nf("example3")
    dc3 = complete_dual_solution(nf3, [0])
    assert dc3.value == 0 and la.is_zero(dc3.Y[:1, :1])


def test_dual_completion_random_objectives():
    """Completed duals are feasible and close the gap with the reduced primal point."""
    _, nf = _nf("large_good", fx.large_example_trace())
    rng = np.random.default_rng(42)
    solved = 0
    for _ in range(30):
        c = [int(t) for t in rng.integers(-3, 4, 4)]
        try:
            dc = complete_dual_solution(nf, c)
        except Unbounded:
            # recession rays of x1 F1 + x2 F2 ⪯ I are (t, -1) with t in [2 - sqrt3, 2 + sqrt3]
            assert max(c[0] * t - c[1] for t in (2 - 3**0.5, 2 + 3**0.5)) > 0
            continue
        solved += 1
        assert max(c[0] * t - c[1] for t in (2 - 3**0.5, 2 + 3**0.5)) <= 1e-9
        gap = check_weak_duality(SdpProblem(nf.system if dc.exact else nf.system.to_float(), tuple(c)), dc.x, dc.Y)
        assert abs(float(gap)) < 1e-6
    assert solved >= 5
