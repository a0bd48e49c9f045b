import math

import numpy as np
import pytest

from alspia.bspline import assemble_collocation
from alspia.datasets import gen_example, mask_indices, singular_mask
from alspia.linops import NormalOperator, Rank, largest_eigenvalue, rank_detect
from alspia.solver import setup_curve


def test_helix_first_sample():
    g = gen_example(4, 10)
    assert g.points.shape == (11, 3)
    assert g.points[0].tolist() == [10.0, 0.0, 0.0]


def test_blob_first_sample():
    g = gen_example(1, 10)
    r = 2 + 5 * math.cos(math.pi / 4)
    np.testing.assert_allclose(g.points[0], [r, 0.0], atol=1e-14)
    assert r == pytest.approx(5.53553, abs=1e-5)


def test_peaks_centre():
    g = gen_example(6, 6, 8)  # theta1 = 0 at h = 3, theta2 = 0 at l = 4
    assert g.points.shape == (7, 9, 3)
    assert g.points[3, 4, 2] == pytest.approx(8 / 3 * math.exp(-1), rel=1e-14)
    assert g.points[3, 4, 2] == pytest.approx(0.98101, abs=1e-5)


def test_domain_endpoints():
    # example 2 spans [0, 4 pi]: both ends at theta = 0 mod 2 pi, with z = 2 cos(theta / 2)
    g = gen_example(2, 20)
    np.testing.assert_allclose(g.points[0], [1.0, 0.0, 2.0], atol=1e-14)
    np.testing.assert_allclose(g.points[-1], [1.0, 0.0, 2.0], atol=1e-14)
    g3 = gen_example(3, 20)
    assert g3.points[0, 0] == 0.0 and g3.points[-1, 0] == 2 * math.pi
    s = gen_example(6, 4)
    assert s.points[0, 0, :2].tolist() == [-3.0, -4.0] and s.points[-1, -1, :2].tolist() == [3.0, 4.0]


def test_deterministic():
    a, b = gen_example(5, 12, 9), gen_example(5, 12, 9)
    np.testing.assert_array_equal(a.points, b.points)


def test_mask_equals_deletion():
    full = gen_example(3, 100)
    holes = ((10, 14), (50, 52))
    masked = gen_example(3, 100, mask=holes)
    keep = np.setdiff1d(np.arange(101), mask_indices(holes, 101))
    np.testing.assert_array_equal(masked.points, full.points[keep])
    np.testing.assert_array_equal(masked.kept, keep)
    assert len(masked.points) == 101 - 8


def test_invalid_inputs():
    with pytest.raises(ValueError):
        gen_example(7, 10)
    with pytest.raises(ValueError):
        gen_example(1, 0)
    with pytest.raises(ValueError):
        gen_example(5, 10, mask=((1, 2),))
    with pytest.raises(ValueError):
        gen_example(1, 10, mask=((0, 9),))
    with pytest.raises(ValueError):
        mask_indices(((5, 20),), 10)
    with pytest.raises(ValueError):
        singular_mask(1, 100, 10)


def _rank(g, n):
    params, knots = setup_curve(g.points, n, g.kept, g.total)
    op = NormalOperator(assemble_collocation(knots, params))
    v = largest_eigenvalue(op).value * (1 + 1e-7)
    dense_rank = np.linalg.matrix_rank(op.dense())
    return rank_detect(op, v), dense_rank


@pytest.mark.parametrize("id,m,n,count", [(3, 1460, 200, 1), (4, 1889, 300, 3)])
def test_singular_mask_desk_scale(id, m, n, count):
    holes = singular_mask(id, m, n)
    assert len(holes) == count
    g = gen_example(id, m, mask=holes)
    detected, dense_rank = _rank(g, n)
    assert detected is Rank.DEFICIENT
    assert dense_rank < n + 1


@pytest.mark.parametrize("id,m,n", [(3, 1460, 200), (4, 1889, 300)])
def test_no_mask_is_full_rank(id, m, n):
    detected, dense_rank = _rank(gen_example(id, m), n)
    assert detected is Rank.FULL and dense_rank == n + 1
