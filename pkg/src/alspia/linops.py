"""Matrix-free normal operators, extreme eigenvalue estimates and a dense least-squares oracle.

Curve problems use the collocation matrix ``A``; the normal matrix is ``A^T A``.
Surface problems use ``A`` (rows) and ``By`` (columns, the transpose of ``B``
in the ``B^T kron A`` notation); control and data grids are stored as 2D
arrays and the Kronecker action is evaluated as ``A @ P @ By.T``. Vectorized
grids use column-major (Fortran) order, matching ``vec``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .bspline import CollocationMatrix

__all__ = [
    "EigenEstimate",
    "NormalOperator",
    "Rank",
    "apply_A",
    "apply_At",
    "apply_normal",
    "direct_lsq_solve",
    "largest_eigenvalue",
    "rank_detect",
    "smallest_eigenvalue",
    "spectral_bounds",
]

logger = logging.getLogger(__name__)

EIGEN_SEED = 0xA15
EIGEN_TOL = 1e-8
EIGEN_MAX_ITER = 5000
RANK_THRESHOLD = 1e-10
#: relative residual above which an unconverged largest-eigenvalue estimate is rejected
UNCONVERGED_RTOL = 1e-3


class Rank(str, Enum):
    FULL = "full"
    DEFICIENT = "deficient"


def _as_sparse(M):
    if isinstance(M, CollocationMatrix):
        return M.csr
    if sp.issparse(M):
        return sp.csr_matrix(M)
    return sp.csr_matrix(np.atleast_2d(np.asarray(M, dtype=float)))


class NormalOperator:
    """The collocation operator of a curve (``A``) or a tensor-product surface (``A``, ``By``)."""

    def __init__(self, A, By=None):
        self.A = _as_sparse(A)
        self.At = self.A.T.tocsr()
        self.By = None if By is None else _as_sparse(By)
        self.Byt = None if By is None else self.By.T.tocsr()
        if self.By is not None and self.By.shape[1] != self.A.shape[1]:
            # the control net is square: both directions share n
            raise ValueError(f"surface factors need equal column counts, got "
                             f"{self.A.shape[1]} and {self.By.shape[1]}")

    @classmethod
    def curve(cls, A):
        return cls(A)

    @classmethod
    def surface(cls, A, By):
        return cls(A, By)

    @property
    def is_surface(self) -> bool:
        return self.By is not None

    @property
    def control_shape(self) -> tuple[int, ...]:
        if self.is_surface:
            return (self.A.shape[1], self.By.shape[1])
        return (self.A.shape[1],)

    @property
    def data_shape(self) -> tuple[int, ...]:
        if self.is_surface:
            return (self.A.shape[0], self.By.shape[0])
        return (self.A.shape[0],)

    def factors(self):
        """Curve operators whose normal matrices' Kronecker product is this one's."""
        if not self.is_surface:
            return (self,)
        return (NormalOperator(self.A), NormalOperator(self.By))

    def _grid(self, x, shape):
        """View ``x`` as ``shape + channels``; returns (array, channels, vectorized)."""
        x = np.asarray(x, dtype=float)
        size = math.prod(shape)
        if x.shape[: len(shape)] == shape:
            return x, x.shape[len(shape):], False
        if x.shape[0] == size and len(shape) > 1:
            return x.reshape(shape + x.shape[1:], order="F"), x.shape[1:], True
        raise ValueError(f"expected leading shape {shape} or ({size},), got {x.shape}")

    def _kron_apply(self, left, right, X):
        # left @ X @ right.T, for X of shape (a, b, *channels)
        a, b = X.shape[:2]
        ch = X.shape[2:]
        T = left @ X.reshape(a, -1)
        T = T.reshape((left.shape[0], b) + ch)
        T = np.moveaxis(T, 1, 0).reshape(b, -1)
        U = right @ T
        U = U.reshape((right.shape[0], left.shape[0]) + ch)
        return np.moveaxis(U, 0, 1)

    def matvec(self, x):
        """Data-space image ``A x`` (curve) or ``A X By^T`` (surface)."""
        X, ch, vec = self._grid(x, self.control_shape)
        if not self.is_surface:
            return self.A @ X
        out = self._kron_apply(self.A, self.By, X)
        return out.reshape((-1,) + ch, order="F") if vec else out

    def rmatvec(self, r):
        """Control-space image ``A^T r`` (curve) or ``A^T R By`` (surface)."""
        R, ch, vec = self._grid(r, self.data_shape)
        if not self.is_surface:
            return self.At @ R
        out = self._kron_apply(self.At, self.Byt, R)
        return out.reshape((-1,) + ch, order="F") if vec else out

    def normal(self, x):
        return self.rmatvec(self.matvec(x))

    def dense(self) -> np.ndarray:
        """Materialized ``A`` or ``By kron A`` (tiny problems only)."""
        if not self.is_surface:
            return self.A.toarray()
        return np.kron(self.By.toarray(), self.A.toarray())

    def structurally_empty_columns(self) -> np.ndarray:
        """Control indices whose basis function has no data in its support."""
        if self.is_surface:
            ea = np.flatnonzero(np.asarray(abs(self.A).sum(axis=0)).ravel() == 0)
            eb = np.flatnonzero(np.asarray(abs(self.By).sum(axis=0)).ravel() == 0)
            return np.concatenate([ea, eb])
        return np.flatnonzero(np.asarray(abs(self.A).sum(axis=0)).ravel() == 0)


def apply_A(op: NormalOperator, controls):
    return op.matvec(controls)


def apply_At(op: NormalOperator, residual):
    return op.rmatvec(residual)


def apply_normal(op: NormalOperator, controls):
    return op.normal(controls)


@dataclass(frozen=True)
class EigenEstimate:
    value: float
    residual: float
    iterations: int
    converged: bool = True


def _power_iteration(apply, size, tol, max_iter):
    """Dominant eigenpair of a symmetric PSD map; stops on ``|Mx - theta x| <= tol``."""
    rng = np.random.default_rng(EIGEN_SEED)
    x = rng.standard_normal(size)
    x /= np.linalg.norm(x)
    y = apply(x)
    theta = float(x @ y)
    res = float(np.linalg.norm(y - theta * x))
    for it in range(1, max_iter + 1):
        if res <= tol:
            return EigenEstimate(theta, res, it - 1, True)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return EigenEstimate(0.0, 0.0, it - 1, True)
        x = y / norm
        y = apply(x)
        theta = float(x @ y)
        res = float(np.linalg.norm(y - theta * x))
    if res <= tol:
        return EigenEstimate(theta, res, max_iter, True)
    # the last Rayleigh quotient is the largest seen for a PSD map
    return EigenEstimate(theta, res, max_iter, False)


def largest_eigenvalue(op: NormalOperator, tol: float = EIGEN_TOL,
                       max_iter: int = EIGEN_MAX_ITER) -> EigenEstimate:
    """Largest eigenvalue of the normal matrix by power iteration.

    Surface operators combine the two factor estimates multiplicatively.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if op.is_surface:
        ea, eb = (largest_eigenvalue(f, tol, max_iter) for f in op.factors())
        return EigenEstimate(ea.value * eb.value,
                             ea.value * eb.residual + eb.value * ea.residual,
                             ea.iterations + eb.iterations,
                             ea.converged and eb.converged)
    return _power_iteration(op.normal, op.control_shape[0], tol, max_iter)


def smallest_eigenvalue(op: NormalOperator, v: float, tol: float = EIGEN_TOL,
                        max_iter: int = EIGEN_MAX_ITER,
                        threshold: float = RANK_THRESHOLD) -> EigenEstimate:
    """Smallest eigenvalue via power iteration on ``v I - A^T A``.

    ``v`` must not be below the true largest eigenvalue. Estimates below
    ``threshold * v`` are clamped to 0. A structurally empty column is an
    exact null vector and short-circuits the iteration.
    """
    if op.is_surface:
        fa, fb = op.factors()
        va = largest_eigenvalue(fa, tol, max_iter).value * (1 + 10 * tol)
        vb = largest_eigenvalue(fb, tol, max_iter).value * (1 + 10 * tol)
        ea = smallest_eigenvalue(fa, va, tol, max_iter, threshold)
        eb = smallest_eigenvalue(fb, vb, tol, max_iter, threshold)
        value = ea.value * eb.value
        if value < threshold * v:
            value = 0.0
        return EigenEstimate(value, ea.value * eb.residual + eb.value * ea.residual,
                             ea.iterations + eb.iterations, ea.converged and eb.converged)
    if len(op.structurally_empty_columns()):
        return EigenEstimate(0.0, 0.0, 0, True)
    est = _power_iteration(lambda x: v * x - op.normal(x), op.control_shape[0], tol, max_iter)
    u = v - est.value
    if u < threshold * v:
        u = 0.0
    if not est.converged:
        # Rayleigh quotients of the shifted map underestimate its top eigenvalue,
        # so u is an overestimate: schedules built on it stay convergent
        logger.info("smallest eigenvalue not converged (residual %g); using upper estimate %g",
                    est.residual, u)
    return EigenEstimate(max(u, 0.0), est.residual, est.iterations, est.converged)


def spectral_bounds(op: NormalOperator, tol: float = EIGEN_TOL, max_iter: int = EIGEN_MAX_ITER,
                    threshold: float = RANK_THRESHOLD):
    """``(u, v, largest, smallest)`` with ``v`` inflated by ``1 + 10 tol``.

    Clustered top eigenvalues can keep the power-iteration residual above
    ``tol``. An unconverged estimate ``theta`` with residual ``r`` is still
    used, as ``theta + r``, when ``r <= 1e-3 theta``; symmetric matrices always
    have an eigenvalue within ``r`` of ``theta``.
    """
    big = largest_eigenvalue(op, tol, max_iter)
    if big.value <= 0:
        raise RuntimeError("normal matrix is zero; nothing to fit")
    top = big.value
    if not big.converged:
        if big.residual > UNCONVERGED_RTOL * big.value:
            raise RuntimeError(f"largest eigenvalue estimate did not converge within {max_iter} "
                               f"iterations (value {big.value:g}, residual {big.residual:g})")
        logger.info("largest eigenvalue residual %g above tol; using %g + residual",
                    big.residual, big.value)
        top = big.value + big.residual
    v = top * (1 + 10 * tol)
    small = smallest_eigenvalue(op, v, tol, max_iter, threshold)
    return min(small.value, v), v, big, small


def rank_detect(op: NormalOperator, v: float, tol: float = EIGEN_TOL,
                threshold: float = RANK_THRESHOLD) -> Rank:
    u = smallest_eigenvalue(op, v, tol, threshold=threshold).value
    return Rank.DEFICIENT if u < threshold * v else Rank.FULL


def direct_lsq_solve(A, q):
    """Solve ``A^T A p = A^T q`` by pivoted Cholesky of the normal matrix.

    Returns ``(p, rank)``. For rank-deficient systems the trailing pivoted
    unknowns are set to zero, which gives a (not minimum-norm) solution.
    """
    A = np.atleast_2d(np.asarray(A.toarray() if hasattr(A, "toarray") else A, dtype=float))
    if max(A.shape) > 500:
        raise ValueError("direct oracle is limited to 500x500 systems")
    q = np.asarray(q, dtype=float)
    N = A.T @ A
    b = A.T @ q
    c, piv, rank, info = scipy.linalg.lapack.dpstrf(N, lower=0, tol=-1.0)
    if info < 0:
        raise RuntimeError(f"pivoted Cholesky failed (info={info})")
    piv = piv - 1
    R = np.triu(c)[:rank, :rank]
    bp = b[piv[:rank]]
    y = scipy.linalg.solve_triangular(R, scipy.linalg.solve_triangular(R, bp, trans="T"))
    p = np.zeros((A.shape[1],) + q.shape[1:])
    p[piv[:rank]] = y
    return p, int(rank)
