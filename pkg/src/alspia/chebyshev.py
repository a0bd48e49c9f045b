"""Chebyshev polynomials of the first kind and the step-size schedules built on their roots.

Two schedules are provided. ``schedule_nonsingular`` maps the roots of ``P_k``
onto ``[u, v]`` and takes reciprocals; the resulting residual polynomial
``prod(1 - w * lam)`` is the scaled Chebyshev polynomial of least deviation on
``[u, v]`` with value 1 at the origin. ``schedule_singular`` does the same for
``lam * prod(1 - w * lam)`` on ``[0, v]``, anchored at the root of ``P_{k+1}``
closest to -1 so that the polynomial vanishes at 0 with unit slope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "ScheduleKind",
    "SpectralBounds",
    "StepSchedule",
    "cheb_eval",
    "cheb_zeros",
    "schedule_nonsingular",
    "schedule_singular",
    "schedule_constant",
    "rate_bound",
    "choose_cycle_length",
    "make_schedule",
]

#: Per-cycle reduction targeted when the cycle length is picked automatically.
DEFAULT_CYCLE_TARGET = 1e-6
MIN_CYCLE, MAX_CYCLE = 4, 64
SINGULAR_CYCLE = 16
#: Relative width below which the spectrum is treated as a single point.
POINT_SPECTRUM_RTOL = 1e-12


class ScheduleKind(str, Enum):
    SINGULAR = "singular"
    NONSINGULAR = "nonsingular"
    CONSTANT = "constant"


@dataclass(frozen=True)
class SpectralBounds:
    """Extreme eigenvalues ``u <= v`` of a symmetric positive semidefinite matrix."""

    u: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValueError(f"spectral bounds must be finite, got u={self.u}, v={self.v}")
        if self.v <= 0:
            raise ValueError(f"largest eigenvalue must be positive, got v={self.v}")
        if not 0 <= self.u <= self.v:
            raise ValueError(f"need 0 <= u <= v, got u={self.u}, v={self.v}")

    @property
    def singular(self) -> bool:
        return self.u == 0

    @property
    def condition(self) -> float:
        return math.inf if self.u == 0 else self.v / self.u


@dataclass(frozen=True)
class StepSchedule:
    steps: tuple[float, ...]
    kind: ScheduleKind
    bounds: SpectralBounds

    def __post_init__(self):
        if len(self.steps) == 0:
            raise ValueError("a schedule needs at least one step")
        if any(not (s > 0 and math.isfinite(s)) for s in self.steps):
            raise ValueError("every step must be positive and finite")

    @property
    def cycle_length(self) -> int:
        return len(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def step(self, iteration: int) -> float:
        """Step size for a global iteration counter; steps are reused cyclically."""
        return self.steps[iteration % len(self.steps)]

    def residual_polynomial(self, lam):
        """Evaluate ``prod_l (1 - w_l * lam)`` (times ``lam`` for singular schedules)."""
        lam = np.asarray(lam, dtype=float)
        out = np.ones_like(lam)
        for w in self.steps:
            out = out * (1.0 - w * lam)
        if self.kind is ScheduleKind.SINGULAR:
            out = lam * out
        return out


def cheb_eval(k: int, x: float) -> float:
    """Evaluate the Chebyshev polynomial ``P_k(x)`` with the three-term recurrence."""
    if k < 0:
        raise ValueError(f"degree must be non-negative, got {k}")
    prev, cur = 1.0, float(x)
    if k == 0:
        return prev
    for _ in range(k - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def cheb_zeros(k: int) -> np.ndarray:
    """Zeros ``cos((2l+1) pi / (2k))`` of ``P_k``, for ``l = 0..k-1`` in that order."""
    if k < 1:
        raise ValueError(f"P_0 has no zeros; need k >= 1, got {k}")
    ell = np.arange(k)
    return np.cos((2 * ell + 1) * np.pi / (2 * k))


def _check_k(k):
    if int(k) != k or k < 1:
        raise ValueError(f"cycle length must be a positive integer, got {k}")
    return int(k)


def schedule_nonsingular(bounds: SpectralBounds, k: int) -> StepSchedule:
    k = _check_k(k)
    u, v = bounds.u, bounds.v
    if u <= 0:
        raise ValueError("nonsingular schedule needs u > 0; use schedule_singular")
    steps = 2.0 / ((v + u) + (v - u) * cheb_zeros(k))
    return StepSchedule(tuple(float(s) for s in steps), ScheduleKind.NONSINGULAR, bounds)


def schedule_singular(v: float, k: int) -> StepSchedule:
    k = _check_k(k)
    if not v > 0:
        raise ValueError(f"largest eigenvalue must be positive, got v={v}")
    roots = cheb_zeros(k + 1)
    # roots[k] is the root of P_{k+1} closest to -1; it is mapped to lam = 0.
    anchor = roots[k]
    steps = (1.0 - anchor) / (v * (roots[:k] - anchor))
    return StepSchedule(
        tuple(float(s) for s in steps), ScheduleKind.SINGULAR, SpectralBounds(0.0, float(v))
    )


def schedule_constant(step: float, bounds: SpectralBounds, k: int = 1) -> StepSchedule:
    return StepSchedule((float(step),) * _check_k(k), ScheduleKind.CONSTANT, bounds)


def rate_bound(bounds: SpectralBounds, k: int, kind) -> float:
    """Worst-case contraction of one ``k``-step cycle for the given schedule kind."""
    k = _check_k(k)
    kind = ScheduleKind(kind)
    u, v = bounds.u, bounds.v
    if kind is ScheduleKind.SINGULAR:
        return v * math.pi / (2.0 * (k + 1) ** 2)
    if kind is ScheduleKind.NONSINGULAR:
        if u <= 0:
            raise ValueError("nonsingular rate needs u > 0")
        sv, su = math.sqrt(v), math.sqrt(u)
        return 2.0 * ((sv - su) / (sv + su)) ** k
    raise ValueError(f"no Chebyshev rate bound for kind {kind.value!r}")


def choose_cycle_length(bounds: SpectralBounds, target: float = DEFAULT_CYCLE_TARGET) -> int:
    """Shortest cycle whose nonsingular rate bound reaches ``target``, clamped to [4, 64].

    Singular spectra get a fixed cycle of 16 steps.
    """
    if bounds.singular:
        return SINGULAR_CYCLE
    sv, su = math.sqrt(bounds.v), math.sqrt(bounds.u)
    if sv == su:
        return MIN_CYCLE
    k = math.ceil(math.log(2.0 / target) / math.log((sv + su) / (sv - su)))
    return min(max(k, MIN_CYCLE), MAX_CYCLE)


def make_schedule(bounds: SpectralBounds, k: int | None = None, regime=None) -> StepSchedule:
    """Build the Chebyshev schedule appropriate for ``bounds``.

    ``regime`` forces ``"singular"`` or ``"nonsingular"``; by default the
    regime follows ``bounds.u == 0``. A spectrum narrower than ``1e-12 * v``
    collapses to the constant step ``1/v``.
    """
    regime = ScheduleKind(regime) if regime is not None else None
    if regime is ScheduleKind.SINGULAR or (regime is None and bounds.singular):
        return schedule_singular(bounds.v, k if k is not None else SINGULAR_CYCLE)
    if bounds.singular:
        raise ValueError("cannot build a nonsingular schedule for a singular spectrum")
    if bounds.v - bounds.u < POINT_SPECTRUM_RTOL * bounds.v:
        return schedule_constant(1.0 / bounds.v, bounds, k if k is not None else 1)
    if k is None:
        k = choose_cycle_length(bounds)
    return schedule_nonsingular(bounds, k)
