"""Progressive iterative least-squares B-spline fitting with Chebyshev step schedules."""

from .bspline import (
    CollocationMatrix,
    KnotVector,
    assemble_collocation,
    basis_eval,
    build_knots,
    chord_parameterize,
    initial_controls_curve,
    initial_controls_surface,
    surface_parameterize,
)
from .chebyshev import (
    ScheduleKind,
    SpectralBounds,
    StepSchedule,
    cheb_eval,
    cheb_zeros,
    make_schedule,
    rate_bound,
    schedule_nonsingular,
    schedule_singular,
)
from .datasets import SampledGeometry, gen_example, singular_mask
from .estimators import BSplineCurveFitter, BSplineSurfaceFitter
from .linops import (
    EigenEstimate,
    NormalOperator,
    Rank,
    apply_A,
    apply_At,
    direct_lsq_solve,
    largest_eigenvalue,
    rank_detect,
    smallest_eigenvalue,
)
from .solver import FitConfig, FitReport, Method, fit_curve, fit_surface, lspia_step, relative_error

__version__ = "0.1.0"
