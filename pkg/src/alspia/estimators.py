"""scikit-learn style estimators wrapping the curve and surface solvers."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_grid, check_points
from .bspline import assemble_collocation
from .linops import NormalOperator
from .solver import FitConfig, fit_curve, fit_surface, setup_curve, setup_surface


class _PIABase(BaseEstimator):
    def __init__(self, n=10, method="alspia", tol=1e-6, max_iter=10_000, cycle_k=None,
                 eigen_tol=1e-8, rank_threshold=1e-10, regime=None):
        self.n = n
        self.method = method
        self.tol = tol
        self.max_iter = max_iter
        self.cycle_k = cycle_k
        self.eigen_tol = eigen_tol
        self.rank_threshold = rank_threshold
        self.regime = regime

    def _config(self):
        return FitConfig(method=self.method, tolerance=self.tol, max_iterations=self.max_iter,
                         cycle_k=self.cycle_k, eigen_tol=self.eigen_tol,
                         rank_threshold=self.rank_threshold, regime=self.regime)

    def _store(self, report, controls):
        self.report_ = report
        self.control_points_ = controls
        self.n_iter_ = report.iterations
        self.converged_ = report.converged
        self.error_ = report.final_error


class BSplineCurveFitter(_PIABase):
    """Least-squares cubic B-spline curve with ``n + 1`` control points.

    ``fit`` takes an ordered ``(N, 2|3)`` point sequence, assigns chord-length
    parameters and builds the knot vector, then runs the configured
    progressive iteration. ``predict`` evaluates the fitted curve at
    parameters in ``[0, 1]``.

    Parameters
    ----------
    n : int
        Index of the last control point.
    method : {"alspia", "lspia", "singular-lspia"}
    tol : float
        Stop once the relative back-projected residual falls to ``tol``.
    max_iter : int
    cycle_k : int, optional
        Length of the Chebyshev step cycle; chosen from the spectrum if None.
    eigen_tol, rank_threshold : float
        Power-iteration tolerance and the relative eigenvalue threshold below
        which the normal matrix is treated as singular.
    regime : {"singular", "nonsingular"}, optional
        Force one Chebyshev schedule instead of detecting the rank.
    """

    def fit(self, X, y=None, kept=None, total=None):
        """Fit to ``X``; ``kept``/``total`` describe removed samples (holes)."""
        X = check_points(X, min_points=2)
        params, knots = setup_curve(X, self.n, kept, total)
        report, controls = fit_curve(X, params, knots, self._config())
        self.params_ = params
        self.knots_ = knots
        self._store(report, controls)
        return self

    def predict(self, t):
        check_is_fitted(self, "control_points_")
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return assemble_collocation(self.knots_, t).csr @ self.control_points_

    def score(self, X, y=None):
        """Negative mean squared distance between ``X`` and the curve at its own parameters."""
        X = check_points(X)
        return -float(np.mean(np.sum((X - self.predict(self.params_)) ** 2, axis=1)))


class BSplineSurfaceFitter(_PIABase):
    """Least-squares bicubic tensor-product surface on an ``(n+1) x (n+1)`` control net.

    ``fit`` takes an ``(m+1, p+1, 3)`` grid of points. ``predict(x, y)``
    evaluates the surface on the grid spanned by the two parameter arrays.
    Parameters are those of :class:`BSplineCurveFitter`.
    """

    def fit(self, X, y=None):
        Q = check_grid(X)
        px, py, kx, ky = setup_surface(Q, self.n)
        report, controls = fit_surface(Q, px, py, kx, ky, self._config())
        self.params_ = (px, py)
        self.knots_ = (kx, ky)
        self._store(report, controls)
        return self

    def predict(self, x, y):
        check_is_fitted(self, "control_points_")
        kx, ky = self.knots_
        bx = assemble_collocation(kx, np.atleast_1d(np.asarray(x, dtype=float)))
        by = assemble_collocation(ky, np.atleast_1d(np.asarray(y, dtype=float)))
        return NormalOperator(bx, by).matvec(self.control_points_)

    def score(self, X, y=None):
        Q = check_grid(X)
        return -float(np.mean(np.sum((Q - self.predict(*self.params_)) ** 2, axis=2)))
