"""Scalar deformed log/exp kernel."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qit import QDomainError, QParam, SHANNON_TOL, exp_q, ln_q, pseudo_additivity_residual, q_value
from qit.prob import make_rng

U = np.finfo(float).eps


def test_lnq_hand_values():
    assert ln_q(1.0, 0.5) == 0.0
    assert ln_q(4.0, 0.5) == pytest.approx(2.0, abs=1e-15)
    assert ln_q(0.5, 0.5) == pytest.approx(-0.5857864376269049, abs=1e-15)
    # (0.5**0.25 - 1) / 0.25, evaluated independently
    assert ln_q(0.5, 0.75) == pytest.approx(-0.636414338985142, abs=1e-15)
    assert ln_q(math.e, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert ln_q(math.e, 1.0 + 5e-13) == pytest.approx(1.0, abs=1e-12)


def test_expq_hand_values():
    assert exp_q(0.0, 0.5) == 1.0
    assert exp_q(2.0, 0.5) == pytest.approx(4.0, abs=1e-15)
    assert exp_q(-0.5857864376269049, 0.5) == pytest.approx(0.5, abs=1e-15)
    assert exp_q(1.0, 1.0) == pytest.approx(math.e, abs=1e-15)


def test_lnq_zero_conventions():
    # finite one-sided limit below q = 1, divergent at and above it
    assert ln_q(0.0, 0.5) == -2.0
    assert ln_q(0.0, 0.25) == pytest.approx(-1.0 / 0.75, abs=1e-15)
    assert ln_q(0.0, 1.0) == -math.inf
    assert ln_q(0.0, 1.5) == -math.inf


def test_lnq_domain_errors():
    with pytest.raises(QDomainError):
        ln_q(-1e-9, 0.5)
    with pytest.raises(QDomainError):
        ln_q(float("nan"), 0.5)
    with pytest.raises(QDomainError):
        ln_q([0.2, -0.1], 0.5)


def test_expq_domain_error_carries_boundary():
    with pytest.raises(QDomainError) as exc:
        exp_q(-3.0, 0.5)
    assert exc.value.boundary == pytest.approx(-0.5)
    with pytest.raises(QDomainError):
        exp_q(2.0, 2.0)  # 1 + (1-q)x = -1


def test_qparam_validation():
    assert QParam(0.5).q == 0.5
    assert QParam(1.0 + 1e-13).is_shannon
    assert not QParam(1.0 + 1e-11).is_shannon
    with pytest.raises(ValueError):
        QParam(float("inf"))
    with pytest.raises(ValueError):
        QParam(float("nan"))
    assert q_value(QParam(0.75)) == 0.75
    assert q_value(2) == 2.0
    # QParam accepted anywhere a bare q is
    assert ln_q(4.0, QParam(0.5)) == pytest.approx(2.0, abs=1e-15)


def test_vectorized_matches_scalar():
    xs = np.array([0.1, 0.5, 1.0, 2.0, 7.3])
    for q in (0.25, 0.75, 1.0, 1.5):
        out = ln_q(xs, q)
        assert out.shape == xs.shape
        for i, x in enumerate(xs):
            assert out[i] == ln_q(float(x), q)
    ys = np.array([-0.4, 0.0, 0.3, 1.2])
    out = exp_q(ys, 0.5)
    for i, y in enumerate(ys):
        assert out[i] == exp_q(float(y), 0.5)


def test_pseudo_additivity_trivial_cases():
    # ln_q(1) = 0 kills both the linear and the cross term, exactly
    assert pseudo_additivity_residual(1.0, 3.7, 0.5) == 0.0
    assert pseudo_additivity_residual(0.5, 0.5, 0.75) == pytest.approx(0.0, abs=1e-12)
    assert pseudo_additivity_residual(2.0, 5.0, 1.0) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(QDomainError):
        pseudo_additivity_residual(0.0, 1.0, 0.5)


@given(
    x=st.floats(min_value=1e-4, max_value=1e4),
    y=st.floats(min_value=1e-4, max_value=1e4),
    q=st.floats(min_value=0.0, max_value=2.0),
)
@settings(max_examples=300, deadline=None)
def test_pseudo_additivity_residual_small(x, y, q):
    r = pseudo_additivity_residual(x, y, q)
    assert abs(r) <= 1e-10 * (1.0 + abs(ln_q(x * y, q)))


@given(
    x=st.floats(min_value=1e-3, max_value=1e3),
    ratio=st.floats(min_value=1.01, max_value=100.0),
    q=st.floats(min_value=0.0, max_value=2.0),
)
@settings(max_examples=300, deadline=None)
def test_lnq_strictly_increasing(x, ratio, q):
    assert ln_q(x, q) < ln_q(x * ratio, q)


@given(t=st.floats(min_value=1e-6, max_value=1.0), q=st.floats(min_value=0.0, max_value=2.0))
@settings(max_examples=300, deadline=None)
def test_lnq_nonpositive_on_unit_interval(t, q):
    v = ln_q(t, q)
    assert v <= 0.0
    if t <= 1.0 - 1e-9:
        assert v < 0.0
    assert ln_q(1.0, q) == 0.0


def test_roundtrip_well_conditioned_q():
    # away from the domain boundary the roundtrip is essentially exact
    rng = make_rng(42)
    xs = np.exp(rng.uniform(math.log(1e-6), math.log(1e6), size=1000))
    for q in (0.5, 0.75, 1.0, 1.5):
        for x in xs:
            x = float(x)
            assert abs(exp_q(ln_q(x, q), q) - x) / x <= 1e-12


def test_roundtrip_conditioned_bound_extreme_q():
    # reconstructing 1 + (1-q) ln_q(x) = x^(1-q) cancels ~x^|1-q| digits,
    # so the achievable relative error grows with that factor
    rng = make_rng(43)
    xs = np.exp(rng.uniform(math.log(1e-6), math.log(1e6), size=1000))
    for q in (0.25, 2.0):
        for x in xs:
            x = float(x)
            cond = max(x, 1.0 / x) ** abs(1.0 - q)
            bound = max(1e-12, 100.0 * U * cond)
            assert abs(exp_q(ln_q(x, q), q) - x) / x <= bound


def test_shannon_limit_deviation():
    rng = make_rng(7)
    for q in (1.0 + 1e-4, 1.0 - 1e-4):
        # inside a moderate range the classical log is recovered to 1e-3
        for x in np.exp(rng.uniform(math.log(0.02), math.log(50.0), size=400)):
            assert abs(ln_q(float(x), q) - math.log(x)) <= 1e-3
        # over a wider range the deviation follows the second-order term
        # |1-q| ln(x)^2 / 2 and exceeds 1e-3 near the ends
        for x in np.exp(rng.uniform(math.log(0.01), math.log(100.0), size=400)):
            dev = abs(ln_q(float(x), q) - math.log(x))
            assert dev <= 0.51 * 1e-4 * math.log(x) ** 2 + 1e-12
    assert abs(ln_q(100.0, 1.0 + 1e-4) - math.log(100.0)) > 1e-3


def test_shannon_branch_is_exact_log():
    xs = [0.02, 0.5, 3.0, 77.0]
    for x in xs:
        assert ln_q(x, 1.0) == math.log(x)
        assert ln_q(x, 1.0 - 0.5 * SHANNON_TOL) == math.log(x)
