"""Progressive iterative least-squares fitting: LSPIA, singular LSPIA and ALSPIA.

Every scheme is the Richardson-type update

    p <- p + Lambda A^T (q - A p)

with ``Lambda`` a constant multiple of the identity (LSPIA), the inverse
column sums of the collocation matrix (singular LSPIA), or a scalar that
cycles through a Chebyshev step schedule (ALSPIA). All coordinate channels
share the same steps.

The stopping quantity is

    E_k = |A^T r_k|_F^2 / |A^T r_0|_F^2,

the squared Frobenius norm of the back-projected residual relative to its
initial value. It is evaluated every iteration from the back-projection the
update needs anyway.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .bspline import (
    KnotVector,
    assemble_collocation,
    build_knots,
    chord_parameterize,
    fill_hole_params,
    initial_controls_curve,
    initial_controls_surface,
    surface_parameterize,
)
from .chebyshev import (
    ScheduleKind,
    SpectralBounds,
    StepSchedule,
    make_schedule,
    schedule_constant,
)
from .linops import EIGEN_TOL, RANK_THRESHOLD, NormalOperator, spectral_bounds

__all__ = [
    "FitConfig",
    "FitReport",
    "FitState",
    "Method",
    "fit",
    "fit_curve",
    "fit_surface",
    "init_state",
    "lspia_step",
    "relative_error",
    "setup_curve",
    "setup_surface",
    "singular_weights",
]

logger = logging.getLogger(__name__)

NORM_CONVENTION = "squared Frobenius norm of A^T r, relative to iteration 0"


class Method(str, Enum):
    LSPIA = "lspia"
    SINGULAR_LSPIA = "singular-lspia"
    ALSPIA = "alspia"


@dataclass(frozen=True)
class FitConfig:
    method: Method = Method.ALSPIA
    tolerance: float = 1e-6
    max_iterations: int = 10_000
    cycle_k: int | None = None
    eigen_tol: float = EIGEN_TOL
    rank_threshold: float = RANK_THRESHOLD
    #: force "singular" or "nonsingular" step schedules instead of detecting the rank
    regime: str | None = None
    #: skip eigenvalue estimation and use these bounds as given
    bounds: SpectralBounds | None = None
    timing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError(f"max_iterations must be a positive integer, got {self.max_iterations}")
        if self.cycle_k is not None and (int(self.cycle_k) != self.cycle_k or self.cycle_k < 1):
            raise ValueError(f"cycle_k must be a positive integer, got {self.cycle_k}")
        if self.regime is not None:
            object.__setattr__(self, "regime", ScheduleKind(self.regime).value)
            if self.regime == ScheduleKind.CONSTANT.value:
                raise ValueError("regime must be 'singular' or 'nonsingular'")


@dataclass
class FitState:
    controls: np.ndarray
    data: np.ndarray
    residual: np.ndarray
    backprojection: np.ndarray
    iteration: int = 0
    history: list = field(default_factory=list)


@dataclass
class FitReport:
    method: str
    converged: bool
    iterations: int
    final_error: float
    history: list
    u: float
    v: float
    cycle_k: int
    regime: str
    wall_seconds: float
    rank: str = "full"
    norm: str = NORM_CONVENTION

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "converged": self.converged,
            "iterations": self.iterations,
            "final_error": self.final_error,
            "u": self.u,
            "v": self.v,
            "cycle_k": self.cycle_k,
            "regime": self.regime,
            "rank": self.rank,
            "norm": self.norm,
            "error_history": [list(h) for h in self.history],
            "wall_seconds": self.wall_seconds,
        }


def init_state(op: NormalOperator, data, controls) -> FitState:
    data = np.asarray(data, dtype=float)
    controls = np.array(controls, dtype=float)
    residual = data - op.matvec(controls)
    return FitState(controls, data, residual, op.rmatvec(residual))


def lspia_step(state: FitState, op: NormalOperator, weights) -> FitState:
    """One update ``p + Lambda A^T r``; ``weights`` is a scalar or the diagonal of ``Lambda``.

    A diagonal given as an array must match the control shape (without channels).
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim:
        if w.shape != op.control_shape:
            raise ValueError(f"weights shape {w.shape} != control shape {op.control_shape}")
        w = w.reshape(w.shape + (1,) * (state.controls.ndim - w.ndim))
    controls = state.controls + w * state.backprojection
    residual = state.data - op.matvec(controls)
    return FitState(controls, state.data, residual, op.rmatvec(residual),
                    state.iteration + 1, state.history)


def relative_error(state: FitState, initial_norm: float) -> float:
    """``|A^T r_k|^2 / initial_norm`` where ``initial_norm = |A^T r_0|^2``.

    A zero initial back-projection means the start is already a least-squares
    solution, and the error is reported as 0.
    """
    num = float(np.sum(state.backprojection ** 2))
    if initial_norm == 0.0:
        return 0.0
    return num / initial_norm


def singular_weights(op: NormalOperator) -> np.ndarray:
    """Diagonal of ``Lambda`` for singular LSPIA: inverse basis column sums, 0 on empty columns."""
    def inv(col):
        out = np.zeros_like(col)
        np.divide(1.0, col, out=out, where=col > 0)
        return out

    ca = np.asarray(op.A.sum(axis=0)).ravel()
    if not op.is_surface:
        return inv(ca)
    cb = np.asarray(op.By.sum(axis=0)).ravel()
    return inv(np.outer(ca, cb))


def _resolve_bounds(op, config):
    if config.bounds is not None:
        return config.bounds
    u, v, big, small = spectral_bounds(op, config.eigen_tol, threshold=config.rank_threshold)
    logger.debug("spectral bounds u=%g v=%g (power iterations %d/%d)",
                 u, v, big.iterations, small.iterations)
    return SpectralBounds(u, v)


def _weights(op, config, bounds) -> tuple[StepSchedule | None, np.ndarray | None, str]:
    if config.method is Method.SINGULAR_LSPIA:
        return None, singular_weights(op), "diagonal"
    if config.method is Method.LSPIA:
        step = 2.0 / (bounds.v + bounds.u) if bounds.u > 0 else 1.0 / bounds.v
        return schedule_constant(step, bounds), None, ScheduleKind.CONSTANT.value
    schedule = make_schedule(bounds, config.cycle_k, config.regime)
    return schedule, None, schedule.kind.value


def fit(op: NormalOperator, data, initial, config: FitConfig = FitConfig()):
    """Run the configured scheme from ``initial`` until ``E_k <= tolerance``.

    Returns ``(FitReport, controls)``. Reaching ``max_iterations`` is not an
    error; the report carries ``converged=False``.
    """
    bounds = _resolve_bounds(op, config)
    schedule, diag, regime = _weights(op, config, bounds)
    state = init_state(op, data, initial)
    d0 = float(np.sum(state.backprojection ** 2))
    err = relative_error(state, d0) if d0 == 0.0 else 1.0
    history = [(0, err, 0.0)]
    clock = time.perf_counter
    start = clock()
    while err > config.tolerance and state.iteration < config.max_iterations:
        w = diag if schedule is None else schedule.step(state.iteration)
        state = lspia_step(state, op, w)
        err = relative_error(state, d0)
        elapsed = clock() - start if config.timing else 0.0
        history.append((state.iteration, err, elapsed))
        if not np.isfinite(err):
            logger.warning("iteration diverged at step %d", state.iteration)
            break
    wall = clock() - start if config.timing else 0.0
    report = FitReport(
        method=config.method.value,
        converged=bool(err <= config.tolerance),
        iterations=state.iteration,
        final_error=err,
        history=history,
        u=bounds.u,
        v=bounds.v,
        cycle_k=1 if schedule is None else schedule.cycle_length,
        regime=regime,
        wall_seconds=wall,
        rank="deficient" if bounds.u == 0 else "full",
    )
    return report, state.controls


def fit_curve(points, params, knots: KnotVector, config: FitConfig = FitConfig(), initial=None):
    """Fit a B-spline curve to ``points`` sampled at ``params``."""
    points = np.asarray(points, dtype=float)
    A = assemble_collocation(knots, params)
    if A.shape[0] != len(points):
        raise ValueError(f"{len(points)} points but {A.shape[0]} parameters")
    if initial is None:
        initial = initial_controls_curve(points, knots.n)
    return fit(NormalOperator(A), points, initial, config)


def fit_surface(grid, params_x, params_y, knots_x: KnotVector, knots_y: KnotVector,
                config: FitConfig = FitConfig(), initial=None):
    """Fit a tensor-product B-spline surface to an ``(m+1, p+1, 3)`` grid."""
    grid = np.asarray(grid, dtype=float)
    if knots_x.n != knots_y.n:
        raise ValueError("surface control nets are square: knot vectors must share n")
    A = assemble_collocation(knots_x, params_x)
    By = assemble_collocation(knots_y, params_y)
    if grid.shape[:2] != (A.shape[0], By.shape[0]):
        raise ValueError(f"grid shape {grid.shape[:2]} does not match parameters "
                         f"({A.shape[0]}, {By.shape[0]})")
    if initial is None:
        initial = initial_controls_surface(grid, knots_x.n)
    return fit(NormalOperator(A, By), grid, initial, config)


def setup_curve(points, n: int, kept=None, total: int | None = None):
    """Chord parameters and knot vector for a (possibly holed) point sequence.

    ``kept`` lists the original sample index of each row of ``points`` when
    samples were removed; the knots are then built over all ``total`` slots.
    Returns ``(params, knots)`` where ``params`` match the rows of ``points``.
    """
    params = chord_parameterize(points)
    if kept is None:
        return params, build_knots(params, n)
    full = fill_hole_params(params, kept, total)
    return params, build_knots(full, n)


def setup_surface(grid, n: int):
    x, y = surface_parameterize(grid)
    return x, y, build_knots(x, n), build_knots(y, n)


def with_method(config: FitConfig, method) -> FitConfig:
    return replace(config, method=Method(method))
