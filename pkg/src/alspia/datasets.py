"""Sampled test geometries: four curves and two surfaces, with optional holes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bspline import assemble_collocation
from .linops import NormalOperator, Rank, largest_eigenvalue, rank_detect
from .solver import setup_curve

__all__ = [
    "CURVE_IDS",
    "SURFACE_IDS",
    "SampledGeometry",
    "blob",
    "cardioid",
    "gen_example",
    "graph_function",
    "helix",
    "lemniscate",
    "peaks",
    "singular_mask",
    "mask_indices",
]

CURVE_IDS = (1, 2, 3, 4)
SURFACE_IDS = (5, 6)


def blob(theta):
    r = 2 + 4 * np.cos(2 * theta + np.pi / 4) + np.cos(3 * theta + np.pi / 4)
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)


def cardioid(theta):
    return np.stack([2 * np.cos(theta) - np.cos(3 * theta),
                     2 * np.sin(theta) - np.sin(3 * theta),
                     2 * np.cos(theta / 2)], axis=-1)


def graph_function(theta):
    f = (3 + theta) ** 2 * np.sin(10 * theta) * np.cos(theta) ** 2 / (theta + 1) ** 2
    return np.stack([theta, f], axis=-1)


def helix(theta):
    s = theta * np.pi / 3
    return np.stack([10 * np.cos(s), 10 * np.sin(s), s], axis=-1)


def lemniscate(t1, t2):
    s = np.sqrt(np.abs(np.sin(2 * t1)))
    x = s * np.cos(t1) * np.cos(t2)
    y = s * np.sin(t1) * np.cos(t2)
    z = x ** 2 - y ** 2 + 2 * x * y * np.tan(t2) ** 2
    return np.stack([x, y, z], axis=-1)


def peaks(t1, t2):
    z = (3 * (1 - t1) ** 2 * np.exp(-t1 ** 2 - (t2 + 1) ** 2)
         - 10 * (t1 / 5 - t1 ** 3 - t2 ** 5) * np.exp(-t1 ** 2 - t2 ** 2)
         - np.exp(-(t1 + 1) ** 2 - t2 ** 2) / 3)
    t1, t2 = np.broadcast_arrays(t1, t2)
    return np.stack([t1, t2, z], axis=-1)


_CURVES = {1: (blob, 0.0, 2 * np.pi), 2: (cardioid, 0.0, 4 * np.pi),
           3: (graph_function, 0.0, 2 * np.pi), 4: (helix, 0.0, 2 * np.pi)}
_SURFACES = {5: (lemniscate, (0.0, np.pi), (0.0, np.pi)),
             6: (peaks, (-3.0, 3.0), (-4.0, 4.0))}


@dataclass(frozen=True)
class SampledGeometry:
    """Samples of one test geometry.

    ``points`` holds the kept samples: ``(N, d)`` for curves and
    ``(m+1, p+1, 3)`` for surfaces. ``kept`` gives the original index of each
    curve sample, so that holes can be reconstructed.
    """

    source: int
    points: np.ndarray
    m: int
    p: int | None = None
    holes: tuple[tuple[int, int], ...] = ()
    kept: np.ndarray | None = None

    @property
    def is_surface(self) -> bool:
        return self.p is not None

    @property
    def total(self) -> int:
        return self.m + 1


def mask_indices(holes, total: int) -> np.ndarray:
    """Indices removed by inclusive ``(start, stop)`` ranges."""
    removed = np.zeros(total, dtype=bool)
    for a, b in holes:
        if not 0 <= a <= b < total:
            raise ValueError(f"hole {a}-{b} outside [0, {total - 1}]")
        removed[a: b + 1] = True
    return np.flatnonzero(removed)


def gen_example(id: int, m: int, p: int | None = None, mask=None) -> SampledGeometry:
    """Sample example ``id`` uniformly in its parameter domain, endpoints included.

    ``mask`` is a sequence of inclusive index ranges to drop (curves only).
    """
    if id in _CURVES:
        if m < 1:
            raise ValueError(f"need m >= 1, got {m}")
        func, lo, hi = _CURVES[id]
        pts = func(np.linspace(lo, hi, m + 1))
        holes = tuple((int(a), int(b)) for a, b in (mask or ()))
        removed = mask_indices(holes, m + 1)
        kept = np.setdiff1d(np.arange(m + 1), removed)
        if len(kept) < 3:
            raise ValueError("mask leaves fewer than 3 samples")
        return SampledGeometry(id, pts[kept], m, None, holes, kept if holes else None)
    if id in _SURFACES:
        if p is None:
            p = m
        if m < 1 or p < 1:
            raise ValueError(f"need m, p >= 1, got m={m}, p={p}")
        if mask:
            raise ValueError("holes are only supported for curve examples")
        func, (a0, a1), (b0, b1) = _SURFACES[id]
        t1 = np.linspace(a0, a1, m + 1)[:, None]
        t2 = np.linspace(b0, b1, p + 1)[None, :]
        return SampledGeometry(id, func(t1, t2), m, p)
    raise ValueError(f"unknown example id {id!r}; expected 1..6")


# hole centres and widths as fractions of the parameter domain
_HOLE_LAYOUT = {3: ((0.5, 0.04),), 4: ((0.2, 0.03), (0.5, 0.03), (0.8, 0.03))}


def _holes(id, m, scale):
    holes = []
    for centre, width in _HOLE_LAYOUT[id]:
        half = 0.5 * width * scale
        a = int(np.ceil((centre - half) * m))
        b = int(np.floor((centre + half) * m))
        holes.append((max(a, 1), min(b, m - 1)))
    return tuple(holes)


def _is_deficient(id, m, n, holes):
    g = gen_example(id, m, mask=holes)
    params, knots = setup_curve(g.points, n, g.kept, g.total)
    op = NormalOperator(assemble_collocation(knots, params))
    v = largest_eigenvalue(op).value * (1 + 1e-7)
    return rank_detect(op, v) is Rank.DEFICIENT


def singular_mask(id: int, m: int, n: int) -> tuple[tuple[int, int], ...]:
    """Hole ranges that make the collocation of example 3 or 4 rank deficient.

    Example 3 loses the central 4% of its domain, example 4 three 3%-wide
    bands around 20%, 50% and 80%. Holes are widened by 1.5x per retry.
    """
    if id not in _HOLE_LAYOUT:
        raise ValueError(f"singular masks are defined for examples 3 and 4, got {id}")
    scale = 1.0
    for _ in range(4):
        holes = _holes(id, m, scale)
        if _is_deficient(id, m, n, holes):
            return holes
        scale *= 1.5
    raise RuntimeError(f"could not induce rank deficiency for example {id} at m={m}, n={n}")
