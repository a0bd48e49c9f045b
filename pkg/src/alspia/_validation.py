"""Input checks shared by the functional API and the estimators."""

import numpy as np
from sklearn.utils import check_array


def check_points(points, min_points=1):
    """Return an ``(N, d)`` float array of 2D or 3D points."""
    q = check_array(points, dtype=np.float64, ensure_min_samples=min_points)
    if q.shape[1] not in (2, 3):
        raise ValueError(f"points must be 2D or 3D, got dimension {q.shape[1]}")
    return q


def check_grid(grid, min_size=2):
    """Return an ``(m+1, p+1, d)`` float array of grid points."""
    Q = np.asarray(grid, dtype=np.float64)
    if Q.ndim != 3 or Q.shape[2] not in (2, 3):
        raise ValueError(f"grid must have shape (m+1, p+1, 2|3), got {Q.shape}")
    if min(Q.shape[:2]) < min_size:
        raise ValueError(f"grid needs at least {min_size} samples per direction")
    if not np.all(np.isfinite(Q)):
        raise ValueError("grid contains non-finite coordinates")
    return Q


def check_positive(name, value, integer=False):
    if integer and (int(value) != value):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return int(value) if integer else float(value)
