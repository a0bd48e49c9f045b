import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alspia.chebyshev import (
    ScheduleKind,
    SpectralBounds,
    cheb_eval,
    cheb_zeros,
    choose_cycle_length,
    make_schedule,
    rate_bound,
    schedule_constant,
    schedule_nonsingular,
    schedule_singular,
)


# --- cheb_eval -------------------------------------------------------------

@pytest.mark.parametrize("k,x,expected", [(0, 0.3, 1.0), (4, 0.0, 1.0), (3, 0.5, -1.0)])
def test_cheb_eval_values(k, x, expected):
    assert cheb_eval(k, x) == pytest.approx(expected, abs=1e-15)


def test_cheb_eval_matches_trig_form():
    xs = np.linspace(-1, 1, 200)
    for k in range(51):
        for x in xs:
            assert abs(cheb_eval(k, x) - math.cos(k * math.acos(x))) <= 1e-12


def test_cheb_eval_bounded_and_one_at_one():
    for k in range(51):
        assert cheb_eval(k, 1.0) == 1.0
        for x in np.linspace(-1, 1, 101):
            assert abs(cheb_eval(k, x)) <= 1 + 1e-12


@given(k=st.integers(0, 30), x=st.floats(1.0, 3.0) | st.floats(-3.0, -1.0))
def test_cheb_eval_outside_interval(k, x):
    s = math.sqrt(x * x - 1)
    w = x + s if x >= 1 else x - s
    closed = 0.5 * (w ** k + w ** (-k))
    assert cheb_eval(k, x) == pytest.approx(closed, rel=1e-10)


def test_cheb_eval_rejects_negative_degree():
    with pytest.raises(ValueError):
        cheb_eval(-1, 0.0)


# --- cheb_zeros ------------------------------------------------------------

def test_cheb_zeros_small():
    np.testing.assert_allclose(cheb_zeros(1), [0.0], atol=1e-16)
    np.testing.assert_allclose(cheb_zeros(2), [math.sqrt(2) / 2, -math.sqrt(2) / 2])
    np.testing.assert_allclose(cheb_zeros(3), [math.sqrt(3) / 2, 0.0, -math.sqrt(3) / 2], atol=1e-16)


def test_cheb_zeros_are_roots():
    for k in range(1, 51):
        for z in cheb_zeros(k):
            assert abs(cheb_eval(k, z)) <= 1e-10


def test_cheb_zeros_rejects_zero():
    with pytest.raises(ValueError):
        cheb_zeros(0)


# --- schedules -------------------------------------------------------------

def test_nonsingular_k1_is_optimal_constant_step():
    s = schedule_nonsingular(SpectralBounds(1.0, 4.0), 1)
    assert s.steps == pytest.approx((0.4,))


def test_nonsingular_k2_values():
    s = schedule_nonsingular(SpectralBounds(1.0, 4.0), 2)
    # reciprocals of the mapped roots 2.5 +- 1.5 * sqrt(2)/2
    np.testing.assert_allclose(s.steps, [1 / 3.560660171779821, 1 / 1.4393398282201788], rtol=1e-12)
    np.testing.assert_allclose(s.steps, [0.28085, 0.69476], atol=5e-6)


def test_nonsingular_degenerate_spectrum():
    s = schedule_nonsingular(SpectralBounds(3.0, 3.0), 2)
    np.testing.assert_allclose(s.steps, [1 / 3, 1 / 3])


def test_nonsingular_rejects_singular_bounds():
    with pytest.raises(ValueError):
        schedule_nonsingular(SpectralBounds(0.0, 1.0), 3)
    with pytest.raises(ValueError):
        schedule_nonsingular(SpectralBounds(1.0, 2.0), 0)


@pytest.mark.parametrize("v,k,expected", [
    (1.0, 1, [(1 + math.sqrt(2) / 2) / math.sqrt(2)]),
    (1.0, 2, [(1 + math.sqrt(3) / 2) / math.sqrt(3), (1 + math.sqrt(3) / 2) / (math.sqrt(3) / 2)]),
    (2.0, 2, [0.53868, 1.07735]),
])
def test_singular_values(v, k, expected):
    s = schedule_singular(v, k)
    np.testing.assert_allclose(s.steps, expected, rtol=1e-5)
    assert s.kind is ScheduleKind.SINGULAR


def test_singular_rejects_bad_input():
    with pytest.raises(ValueError):
        schedule_singular(0.0, 3)
    with pytest.raises(ValueError):
        schedule_singular(1.0, 0)


def test_constant_schedule():
    s = schedule_constant(0.25, SpectralBounds(1.0, 4.0), 3)
    assert s.steps == (0.25, 0.25, 0.25)
    assert s.cycle_length == 3
    assert [s.step(i) for i in range(5)] == [0.25] * 5


def test_step_cycles_in_root_order():
    s = schedule_nonsingular(SpectralBounds(1.0, 4.0), 3)
    assert [s.step(i) for i in range(7)] == [s.steps[i % 3] for i in range(7)]
    assert s.steps[0] < s.steps[1] < s.steps[2]


bounds_st = st.tuples(st.floats(0.01, 10.0), st.floats(1.0, 1000.0)).map(
    lambda t: SpectralBounds(t[0], t[0] * t[1]))


@given(bounds=bounds_st, k=st.integers(1, 40))
def test_nonsingular_steps_in_inverse_interval(bounds, k):
    s = schedule_nonsingular(bounds, k)
    for w in s.steps:
        assert 1 / bounds.v * (1 - 1e-12) <= w <= 1 / bounds.u * (1 + 1e-12)


@given(bounds=bounds_st, k=st.integers(1, 40))
@settings(max_examples=60)
def test_nonsingular_residual_polynomial_bound(bounds, k):
    s = schedule_nonsingular(bounds, k)
    assert s.residual_polynomial(0.0) == pytest.approx(1.0, abs=1e-12)
    lam = np.linspace(bounds.u, bounds.v, 1000)
    worst = np.max(np.abs(s.residual_polynomial(lam)))
    assert worst <= rate_bound(bounds, k, ScheduleKind.NONSINGULAR) + 1e-10


@given(v=st.floats(0.1, 100.0), k=st.integers(5, 60))
@settings(max_examples=60)
def test_singular_residual_polynomial_bound(v, k):
    s = schedule_singular(v, k)
    assert s.residual_polynomial(0.0) == 0.0
    h = 1e-7
    # central difference: a one-sided quotient carries an O(h * sum(steps)) bias
    slope = float(s.residual_polynomial(h) - s.residual_polynomial(-h)) / (2 * h)
    assert slope == pytest.approx(1.0, rel=1e-5)
    lam = np.linspace(0.0, v, 2001)
    worst = np.max(np.abs(s.residual_polynomial(lam)))
    assert worst <= rate_bound(SpectralBounds(0.0, v), k, ScheduleKind.SINGULAR) + 1e-10


def test_singular_small_k_values_recorded():
    # the sine estimate behind the bound needs k >= 5; smaller cycles are only reported
    lam = np.linspace(0.0, 1.0, 20001)
    for k in range(1, 5):
        worst = np.max(np.abs(schedule_singular(1.0, k).residual_polynomial(lam)))
        assert 0 < worst < 1


# --- rate bounds and cycle length ------------------------------------------

def test_rate_bound_values():
    assert rate_bound(SpectralBounds(1, 4), 8, "nonsingular") == pytest.approx(2 / 3 ** 8)
    assert rate_bound(SpectralBounds(1, 4), 8, "nonsingular") == pytest.approx(3.0483e-4, rel=1e-4)
    assert rate_bound(SpectralBounds(0, 1), 9, "singular") == pytest.approx(math.pi / 200)
    assert rate_bound(SpectralBounds(2, 2), 5, "nonsingular") == 0.0


def test_rate_bound_rejects_mismatch():
    with pytest.raises(ValueError):
        rate_bound(SpectralBounds(0, 1), 3, "nonsingular")
    with pytest.raises(ValueError):
        rate_bound(SpectralBounds(1, 2), 3, "constant")


def test_choose_cycle_length():
    b = SpectralBounds(1.0, 4.0)
    k = choose_cycle_length(b)
    assert rate_bound(b, k, "nonsingular") <= 1e-6 < rate_bound(b, k - 1, "nonsingular")
    assert choose_cycle_length(SpectralBounds(0.0, 4.0)) == 16
    assert choose_cycle_length(SpectralBounds(1.0, 1.0 + 1e-3)) == 4
    assert choose_cycle_length(SpectralBounds(1e-12, 1.0)) == 64


def test_make_schedule_routing():
    assert make_schedule(SpectralBounds(0.0, 2.0)).kind is ScheduleKind.SINGULAR
    assert make_schedule(SpectralBounds(0.0, 2.0)).cycle_length == 16
    assert make_schedule(SpectralBounds(1.0, 2.0), k=5).kind is ScheduleKind.NONSINGULAR
    assert make_schedule(SpectralBounds(1.0, 2.0), regime="singular").kind is ScheduleKind.SINGULAR
    point = make_schedule(SpectralBounds(2.0, 2.0))
    assert point.kind is ScheduleKind.CONSTANT and point.steps == (0.5,)
    with pytest.raises(ValueError):
        make_schedule(SpectralBounds(0.0, 2.0), regime="nonsingular")


def test_spectral_bounds_validation():
    for u, v in [(-1, 1), (2, 1), (0, 0)]:
        with pytest.raises(ValueError):
            SpectralBounds(u, v)
    assert SpectralBounds(0, 1).singular
    assert SpectralBounds(1, 4).condition == 4
