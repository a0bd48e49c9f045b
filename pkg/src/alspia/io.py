"""Point-cloud CSV files and JSON fit reports.

Point files start with a header line::

    # alspia-points v1 <curve|surface|controls> dim=<2|3> m=<m> [p=<p>]

followed by one ``x,y[,z]`` row per point. Surface grids are written h-major
(row index outer, column index inner). Curves with removed samples end with
``# holes: a-b,c-d`` listing the inclusive index ranges that were dropped;
``m`` always counts the samples before removal.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .datasets import mask_indices

__all__ = ["PointFile", "format_float", "read_points", "write_points",
           "read_report", "write_report"]

MAGIC = "alspia-points"
VERSION = "v1"
KINDS = ("curve", "surface", "controls")


def format_float(x) -> str:
    """Shortest round-tripping decimal, with a trailing ``.0`` dropped."""
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


@dataclass
class PointFile:
    kind: str
    dim: int
    m: int
    points: np.ndarray
    p: int | None = None
    holes: tuple[tuple[int, int], ...] = ()

    @property
    def is_grid(self) -> bool:
        return self.p is not None

    @property
    def kept(self):
        """Original sample index of each row, or None when nothing was removed."""
        if not self.holes:
            return None
        removed = mask_indices(self.holes, self.m + 1)
        return np.setdiff1d(np.arange(self.m + 1), removed)


def _format_holes(holes):
    return ",".join(f"{a}-{b}" for a, b in holes)


def _parse_holes(text):
    holes = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        a, sep, b = part.partition("-")
        if not sep:
            raise ValueError(f"bad hole range {part!r}")
        holes.append((int(a), int(b)))
    return tuple(holes)


def write_points(path, points, kind="curve", m=None, p=None, holes=()):
    """Write a curve (``(N, d)``) or grid (``(m+1, p+1, d)``) point file."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 3:
        m_, p_ = pts.shape[0] - 1, pts.shape[1] - 1
        if m is not None and m != m_ or p is not None and p != p_:
            raise ValueError("grid shape disagrees with m/p")
        m, p = m_, p_
        rows = pts.reshape(-1, pts.shape[2])
    elif pts.ndim == 2:
        rows = pts
        if m is None:
            if holes:
                raise ValueError("m is required when holes are given")
            m = len(pts) - 1
    else:
        raise ValueError(f"points must be 2D or 3D arrays, got shape {pts.shape}")
    dim = rows.shape[1]
    header = f"# {MAGIC} {VERSION} {kind} dim={dim} m={m}"
    if p is not None:
        header += f" p={p}"
    lines = [header]
    lines.extend(",".join(format_float(c) for c in row) for row in rows)
    if holes:
        lines.append(f"# holes: {_format_holes(holes)}")
    text = "\n".join(lines) + "\n"
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def read_points(path) -> PointFile:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing '# {MAGIC}' header")
    tokens = lines[0].lstrip("#").split()
    if len(tokens) < 3 or tokens[0] != MAGIC or tokens[1] != VERSION or tokens[2] not in KINDS:
        raise ValueError(f"{path}: unrecognized header {lines[0]!r}")
    fields = {}
    for tok in tokens[3:]:
        key, sep, val = tok.partition("=")
        if not sep:
            raise ValueError(f"{path}: bad header field {tok!r}")
        fields[key] = int(val)
    try:
        dim, m = fields["dim"], fields["m"]
    except KeyError as exc:
        raise ValueError(f"{path}: header lacks {exc.args[0]}") from None
    p = fields.get("p")
    holes = ()
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("holes:"):
                holes = _parse_holes(body[len("holes:"):])
            continue
        try:
            row = [float(c) for c in line.split(",")]
        except ValueError:
            raise ValueError(f"{path}:{lineno}: cannot parse {line!r}") from None
        if len(row) != dim:
            raise ValueError(f"{path}:{lineno}: expected {dim} coordinates, got {len(row)}")
        rows.append(row)
    pts = np.array(rows, dtype=float).reshape(-1, dim)
    if p is not None:
        if len(pts) != (m + 1) * (p + 1):
            raise ValueError(f"{path}: expected {(m + 1) * (p + 1)} grid rows, got {len(pts)}")
        pts = pts.reshape(m + 1, p + 1, dim)
    else:
        expected = m + 1 - len(mask_indices(holes, m + 1))
        if len(pts) != expected:
            raise ValueError(f"{path}: expected {expected} rows, got {len(pts)}")
    return PointFile(tokens[2], dim, m, pts, p, holes)


def write_report(path, report: dict):
    text = json.dumps(report, indent=2, sort_keys=False) + "\n"
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def read_report(path) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if "error_history" not in data:
        raise ValueError(f"{os.fspath(path)}: not a fit report (no error_history)")
    return data
