import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alspia.bspline import CollocationMatrix, assemble_collocation, build_knots
from alspia.chebyshev import SpectralBounds, make_schedule
from alspia.datasets import gen_example
from alspia.linops import NormalOperator, direct_lsq_solve
from alspia.solver import (
    FitConfig,
    Method,
    fit,
    fit_curve,
    fit_surface,
    init_state,
    lspia_step,
    relative_error,
    setup_curve,
    setup_surface,
    singular_weights,
)


def small_curve(seed=0, m=30, n=8, dim=2):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0, 1, m + 1))
    x[0], x[-1] = 0.0, 1.0
    kv = build_knots(np.linspace(0, 1, m + 1), n)
    q = rng.normal(size=(m + 1, dim))
    return x, kv, q


# --- single steps against literal sums -------------------------------------

def test_toy_one_step_is_exact():
    op = NormalOperator(np.array([[1.0], [1.0]]))
    q = np.array([[1.0], [3.0]])
    report, p = fit(op, q, np.zeros((1, 1)), FitConfig(cycle_k=1, max_iterations=1))
    assert report.cycle_k == 1
    np.testing.assert_allclose(p, [[2.0]])
    np.testing.assert_allclose(p, direct_lsq_solve(op.A, q)[0])


def test_curve_step_matches_double_loop():
    x, kv, q = small_curve(dim=3)
    A = assemble_collocation(kv, x).toarray()
    op = NormalOperator(A)
    p0 = np.random.default_rng(9).normal(size=(kv.n + 1, 3))
    w = 0.37
    new = lspia_step(init_state(op, q, p0), op, w).controls
    expected = p0.copy()
    for i in range(kv.n + 1):
        delta = np.zeros(3)
        for j in range(len(x)):
            r = q[j] - sum(A[j, t] * p0[t] for t in range(kv.n + 1))
            delta += A[j, i] * r
        expected[i] += w * delta
    np.testing.assert_allclose(new, expected, atol=1e-12)


def test_surface_step_matches_double_loop():
    g = gen_example(6, 6)
    px, py, kx, ky = setup_surface(g.points, 3)
    A, B = assemble_collocation(kx, px).toarray(), assemble_collocation(ky, py).toarray()
    op = NormalOperator(A, B)
    P0 = np.random.default_rng(4).normal(size=(4, 4, 3))
    w = 0.11
    new = lspia_step(init_state(op, g.points, P0), op, w).controls
    R = g.points - np.einsum("hi,lj,ijc->hlc", A, B, P0)
    expected = P0.copy()
    for i in range(4):
        for j in range(4):
            acc = np.zeros(3)
            for h in range(7):
                for l in range(7):
                    acc += A[h, i] * B[l, j] * R[h, l]
            expected[i, j] += w * acc
    np.testing.assert_allclose(new, expected, atol=1e-12)


def test_relative_error_matches_literal_formula():
    x, kv, q = small_curve(seed=2, dim=3)
    A = assemble_collocation(kv, x).toarray()
    op = NormalOperator(A)
    p0 = np.zeros((kv.n + 1, 3))
    s0 = init_state(op, q, p0)
    s1 = lspia_step(s0, op, 0.2)

    def literal(p):
        total = 0.0
        for i in range(kv.n + 1):
            vec = np.zeros(3)
            for j in range(len(x)):
                vec += A[j, i] * (q[j] - A[j] @ p)
            total += vec @ vec
        return total

    d0 = float(np.sum(s0.backprojection ** 2))
    assert d0 == pytest.approx(literal(p0), rel=1e-13)
    assert relative_error(s0, d0) == 1.0
    assert relative_error(s1, d0) == pytest.approx(literal(s1.controls) / literal(p0), rel=1e-13)


def test_relative_error_zero_cases():
    op = NormalOperator(np.eye(2))
    s = init_state(op, np.ones((2, 1)), np.ones((2, 1)))
    assert relative_error(s, 0.0) == 0.0


# --- weights ---------------------------------------------------------------

def test_lspia_step_weight_forms():
    x, kv, q = small_curve()
    op = NormalOperator(assemble_collocation(kv, x))
    s = init_state(op, q, np.zeros((kv.n + 1, 2)))
    np.testing.assert_array_equal(lspia_step(s, op, np.zeros(kv.n + 1)).controls, s.controls)
    np.testing.assert_array_equal(lspia_step(s, op, np.full(kv.n + 1, 0.3)).controls,
                                  lspia_step(s, op, 0.3).controls)
    with pytest.raises(ValueError):
        lspia_step(s, op, np.ones(3))


def test_singular_weights():
    A = CollocationMatrix.from_dense(np.array([[1.0, 0, 0], [0.5, 0.5, 0], [0.5, 0.5, 0]]))
    np.testing.assert_allclose(singular_weights(NormalOperator(A)), [0.5, 1.0, 0.0])
    surf = singular_weights(NormalOperator(A, A))
    np.testing.assert_allclose(surf, np.outer([0.5, 1.0, 0.0], [0.5, 1.0, 0.0]))


# --- full runs -------------------------------------------------------------

@pytest.mark.parametrize("method", list(Method))
def test_fixed_point_takes_zero_iterations(method):
    x, kv, _ = small_curve()
    A = assemble_collocation(kv, x)
    p = np.random.default_rng(1).normal(size=(kv.n + 1, 2))
    report, out = fit_curve(A.csr @ p, x, kv, FitConfig(method=method), initial=p)
    assert report.iterations == 0 and report.converged
    assert report.history[0][:2] == (0, 0.0)


def test_surface_fixed_point():
    g = gen_example(5, 8)
    px, py, kx, ky = setup_surface(g.points, 4)
    P = np.random.default_rng(0).normal(size=(5, 5, 3))
    data = NormalOperator(assemble_collocation(kx, px), assemble_collocation(ky, py)).matvec(P)
    report, _ = fit_surface(data, px, py, kx, ky, FitConfig(), initial=P)
    assert report.iterations == 0 and report.converged


@pytest.mark.parametrize("method", list(Method))
def test_history_and_report_invariants(method):
    x, kv, q = small_curve(seed=3, m=60, n=12)
    report, _ = fit_curve(q, x, kv, FitConfig(method=method, tolerance=1e-8))
    assert report.history[0] == (0, 1.0, 0.0)
    assert report.converged and report.final_error <= 1e-8
    assert report.history[-1][1] == report.final_error
    assert [h[0] for h in report.history] == list(range(report.iterations + 1))
    d = report.to_dict()
    assert d["method"] == method.value and "norm" in d


def test_cap_reports_not_converged():
    g = gen_example(1, 800)
    params, knots = setup_curve(g.points, 100)
    report, _ = fit_curve(g.points, params, knots, FitConfig(method="lspia", max_iterations=5))
    assert not report.converged and report.iterations == 5
    assert report.final_error > 1e-6


def test_alspia_error_non_increasing_at_cycle_ends():
    g = gen_example(1, 400)
    params, knots = setup_curve(g.points, 60)
    report, _ = fit_curve(g.points, params, knots,
                          FitConfig(cycle_k=6, tolerance=1e-14, max_iterations=300))
    ends = [e for it, e, _ in report.history if it % 6 == 0]
    assert len(ends) > 5
    for a, b in zip(ends, ends[1:]):
        assert b <= a + 1e-12


def test_determinism():
    g = gen_example(2, 300)
    params, knots = setup_curve(g.points, 40)
    cfg = FitConfig(timing=False)
    r1, p1 = fit_curve(g.points, params, knots, cfg)
    r2, p2 = fit_curve(g.points, params, knots, cfg)
    assert r1.to_dict() == r2.to_dict()
    np.testing.assert_array_equal(p1, p2)


def test_matches_direct_oracle_small():
    g = gen_example(3, 60)
    params, knots = setup_curve(g.points, 12)
    report, p = fit_curve(g.points, params, knots, FitConfig(tolerance=1e-12, max_iterations=50_000))
    direct, rank = direct_lsq_solve(assemble_collocation(knots, params), g.points)
    assert rank == 13
    np.testing.assert_allclose(p, direct, rtol=0, atol=1e-6 * np.abs(direct).max())


def test_bounds_override_skips_estimation():
    op = NormalOperator(np.diag([1.0, 2.0]))
    report, _ = fit(op, np.ones((2, 1)), np.zeros((2, 1)),
                    FitConfig(method="lspia", bounds=SpectralBounds(1.0, 4.0), max_iterations=3))
    assert (report.u, report.v) == (1.0, 4.0)


def test_config_validation():
    for bad in (dict(tolerance=0), dict(max_iterations=0), dict(cycle_k=0),
                dict(regime="constant"), dict(method="newton")):
        with pytest.raises(ValueError):
            FitConfig(**bad)


@given(seed=st.integers(0, 10_000), k=st.integers(2, 24))
@settings(max_examples=40, deadline=None)
def test_nonsingular_cycle_contraction(seed, k):
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.05, 1.0)
    v = u * rng.uniform(1.5, 200.0)
    lam = np.concatenate([[u, v], rng.uniform(u, v, 30)])
    sched = make_schedule(SpectralBounds(u, v), k=k)
    factor = np.ones_like(lam)
    for w in sched.steps:
        factor *= 1 - w * lam
    assert np.abs(factor).max() <= 2 * ((np.sqrt(v) - np.sqrt(u)) / (np.sqrt(v) + np.sqrt(u))) ** k + 1e-10


@given(seed=st.integers(0, 10_000), k=st.integers(5, 30))
@settings(max_examples=40, deadline=None)
def test_singular_cycle_contraction(seed, k):
    rng = np.random.default_rng(seed)
    v = rng.uniform(0.5, 20.0)
    lam = np.concatenate([[0.0, v], rng.uniform(0, v, 30)])
    sched = make_schedule(SpectralBounds(0.0, v), k=k)
    factor = lam.copy()
    for w in sched.steps:
        factor *= 1 - w * lam
    assert np.abs(factor).max() <= v * np.pi / (2 * (k + 1) ** 2) + 1e-10
