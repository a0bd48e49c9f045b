"""Clamped B-spline machinery: parameters, knots, basis values and collocation matrices."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from ._validation import check_grid, check_points

__all__ = [
    "CollocationMatrix",
    "KnotVector",
    "assemble_collocation",
    "basis_eval",
    "basis_funs",
    "build_knots",
    "chord_parameterize",
    "fill_hole_params",
    "find_span",
    "initial_controls_curve",
    "initial_controls_surface",
    "initial_indices",
    "surface_parameterize",
]

logger = logging.getLogger(__name__)

DEGREE = 3


@dataclass(frozen=True)
class KnotVector:
    knots: np.ndarray
    degree: int = DEGREE

    def __post_init__(self):
        t = np.asarray(self.knots, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "knots", t)
        p = self.degree
        if t.ndim != 1 or len(t) < 2 * (p + 1):
            raise ValueError(f"need at least {2 * (p + 1)} knots for degree {p}")
        if np.any(np.diff(t) < 0):
            raise ValueError("knots must be non-decreasing")
        if np.any(t[: p + 1] != 0.0) or np.any(t[-(p + 1):] != 1.0):
            raise ValueError("knot vector must be clamped to [0, 1]")
        inner = t[p + 1: -(p + 1)]
        if np.any((inner <= 0.0) | (inner >= 1.0)):
            raise ValueError("interior knots must lie strictly inside (0, 1)")

    @property
    def n(self) -> int:
        """Index of the last basis function (the basis has ``n + 1`` members)."""
        return len(self.knots) - self.degree - 2

    @property
    def interior(self) -> np.ndarray:
        p = self.degree
        return self.knots[p + 1: -(p + 1)]

    def __len__(self):
        return len(self.knots)


@dataclass(frozen=True, eq=False)
class CollocationMatrix:
    """Sparse ``(rows, cols)`` matrix with one contiguous block of values per row.

    Row ``j`` holds ``values[j]`` in columns ``starts[j] .. starts[j] + width - 1``.
    """

    starts: np.ndarray
    values: np.ndarray
    cols: int

    def __post_init__(self):
        starts = np.asarray(self.starts, dtype=np.intp)
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or starts.shape != (values.shape[0],):
            raise ValueError("starts must have one entry per row of values")
        if len(starts) and (starts.min() < 0 or starts.max() + values.shape[1] > self.cols):
            raise ValueError("row span exceeds the column count")
        starts.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.starts), self.cols)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def row(self, j: int) -> tuple[int, np.ndarray]:
        return int(self.starts[j]), self.values[j]

    @cached_property
    def csr(self) -> sp.csr_matrix:
        rows, width = self.values.shape
        indptr = np.arange(0, rows * width + 1, width)
        indices = (self.starts[:, None] + np.arange(width)).ravel()
        return sp.csr_matrix((self.values.ravel(), indices, indptr), shape=self.shape)

    @cached_property
    def csr_t(self) -> sp.csr_matrix:
        return self.csr.T.tocsr()

    def toarray(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for j, (s, vals) in enumerate(zip(self.starts, self.values)):
            out[j, s: s + len(vals)] = vals
        return out

    def column_sums(self) -> np.ndarray:
        return np.asarray(self.csr.sum(axis=0)).ravel()

    def take_rows(self, rows) -> "CollocationMatrix":
        rows = np.asarray(rows)
        return CollocationMatrix(self.starts[rows], self.values[rows], self.cols)

    @classmethod
    def from_dense(cls, dense) -> "CollocationMatrix":
        """Wrap an arbitrary dense matrix (every row spans all columns)."""
        dense = np.atleast_2d(np.asarray(dense, dtype=float))
        return cls(np.zeros(dense.shape[0], dtype=np.intp), dense, dense.shape[1])


def chord_parameterize(points) -> np.ndarray:
    """Normalized accumulated chord-length parameters of an ordered point sequence."""
    q = check_points(points, min_points=2)
    chords = np.linalg.norm(np.diff(q, axis=0), axis=1)
    return _normalized_cumsum(chords)


def _normalized_cumsum(increments):
    total = increments.sum()
    if not total > 0:
        raise ValueError("total chord length is zero; cannot parameterize")
    if np.any(increments <= 0):
        bad = np.flatnonzero(increments <= 0)
        raise ValueError(f"coincident consecutive points at positions {bad[:5].tolist()}; "
                         "parameters would not be strictly increasing")
    x = np.concatenate([[0.0], np.cumsum(increments) / total])
    x[-1] = 1.0
    return x


def surface_parameterize(grid) -> tuple[np.ndarray, np.ndarray]:
    """Row and column parameters of an ``(m+1, p+1, d)`` grid from averaged chords.

    ``x_h`` accumulates ``sum_t |Q[h, t] - Q[h-1, t]|`` and ``y_l`` accumulates
    ``sum_s |Q[s, l] - Q[s, l-1]|``, each normalized by its total.
    """
    Q = check_grid(grid)
    row_chords = np.linalg.norm(np.diff(Q, axis=0), axis=2).sum(axis=1)
    col_chords = np.linalg.norm(np.diff(Q, axis=1), axis=2).sum(axis=0)
    return _normalized_cumsum(row_chords), _normalized_cumsum(col_chords)


def fill_hole_params(params, kept, total: int) -> np.ndarray:
    """Extend parameters of kept samples to all ``total`` sample slots.

    Missing slots are filled linearly in index between their kept neighbours,
    so a knot vector built on the full sequence places knots inside holes.
    """
    kept = np.asarray(kept)
    params = np.asarray(params, dtype=float)
    if kept[0] != 0 or kept[-1] != total - 1:
        raise ValueError("the first and last samples cannot be masked")
    return np.interp(np.arange(total), kept, params)


def build_knots(params, n: int, degree: int = DEGREE) -> KnotVector:
    """Clamped knot vector whose ``n - 3`` interior knots interpolate the parameters.

    Knot ``j`` sits at the fractional index ``j * (m+1) / (n-2)`` of ``params``.
    """
    x = np.asarray(params, dtype=float)
    m = len(x) - 1
    if n < degree:
        # n = degree leaves no interior knots: a single Bezier segment
        raise ValueError(f"need n >= {degree}, got n={n}")
    if m < n:
        raise ValueError(f"need at least n+1={n + 1} parameters, got {m + 1}")
    denom = n - 2
    inner = np.empty(n - degree)
    for j in range(1, n - degree + 1):
        # exact integer split of j*d, d = (m+1)/(n-2)
        i, rem = divmod(j * (m + 1), denom)
        if not 1 <= i <= m:
            raise ValueError(f"knot index {i} out of range [1, {m}]")
        alpha = rem / denom
        inner[j - 1] = (1.0 - alpha) * x[i - 1] + alpha * x[i]
    knots = np.concatenate([np.zeros(degree + 1), inner, np.ones(degree + 1)])
    return KnotVector(knots, degree)


def find_span(knots: KnotVector, x):
    """Index ``s`` with ``t[s] <= x < t[s+1]``; ``x = 1`` maps to the last non-empty span."""
    t = knots.knots
    s = np.searchsorted(t, x, side="right") - 1
    return np.clip(s, knots.degree, knots.n)


def basis_funs(knots: KnotVector, x) -> tuple[np.ndarray, np.ndarray]:
    """Non-zero basis values at each ``x``.

    Returns ``(starts, values)`` with ``values[j, r] = mu_{starts[j] + r}(x[j])``.
    Vectorized triangular Cox-de Boor scheme.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((x < 0.0) | (x > 1.0)) or not np.all(np.isfinite(x)):
        raise ValueError("basis functions are only defined on [0, 1]")
    t = knots.knots
    p = knots.degree
    span = find_span(knots, x)
    N = np.zeros((len(x), p + 1))
    N[:, 0] = 1.0
    left = np.empty((len(x), p + 1))
    right = np.empty((len(x), p + 1))
    for j in range(1, p + 1):
        left[:, j] = x - t[span + 1 - j]
        right[:, j] = t[span + j] - x
        saved = np.zeros(len(x))
        for r in range(j):
            temp = N[:, r] / (right[:, r + 1] + left[:, j - r])
            N[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        N[:, j] = saved
    return span - p, N


def basis_eval(knots: KnotVector, i: int, x: float) -> float:
    """Value of the ``i``-th basis function at ``x``, closed on the right at ``x = 1``."""
    if not 0 <= i <= knots.n:
        raise ValueError(f"basis index {i} outside [0, {knots.n}]")
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x} outside [0, 1]")
    starts, values = basis_funs(knots, x)
    r = i - int(starts[0])
    return float(values[0, r]) if 0 <= r <= knots.degree else 0.0


def assemble_collocation(knots: KnotVector, params) -> CollocationMatrix:
    starts, values = basis_funs(knots, params)
    return CollocationMatrix(starts, values, knots.n + 1)


def initial_indices(m: int, n: int) -> np.ndarray:
    """Sample indices ``0, floor((m+1)i/n) for 0<i<n, m`` used as starting controls."""
    if n < 1 or m < n:
        raise ValueError(f"need 1 <= n <= m, got m={m}, n={n}")
    idx = np.array([0] + [((m + 1) * i) // n for i in range(1, n)] + [m], dtype=np.intp)
    over = idx > m
    if over.any():
        logger.warning("initial control index overflow for m=%d, n=%d; clamped to m", m, n)
        idx[over] = m
    return idx


def initial_controls_curve(points, n: int) -> np.ndarray:
    q = check_points(points, min_points=2)
    return q[initial_indices(len(q) - 1, n)].copy()


def initial_controls_surface(grid, n: int) -> np.ndarray:
    Q = check_grid(grid)
    f1 = initial_indices(Q.shape[0] - 1, n)
    f2 = initial_indices(Q.shape[1] - 1, n)
    return Q[np.ix_(f1, f2)].copy()
