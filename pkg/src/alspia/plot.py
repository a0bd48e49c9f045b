"""Deterministic SVG convergence plots (log10 E against time or iterations)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 160, 20, 50
FLOOR = 1e-16
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _series(report, axis):
    hist = report.get("error_history") or []
    if not hist:
        raise ValueError(f"report for {report.get('method', '?')!r} has an empty error history")
    xs = [float(h[0] if axis == "iterations" else h[2]) for h in hist]
    ys = [math.log10(max(float(h[1]), FLOOR)) for h in hist]
    return xs, ys


def choose_axis(reports) -> str:
    """Time when any report recorded it, otherwise iterations."""
    for rep in reports:
        if any(len(h) > 2 and float(h[2]) > 0 for h in rep.get("error_history") or []):
            return "time"
    return "iterations"


def render_svg(reports, labels=None, axis=None) -> str:
    """One polyline per report; ``labels`` default to each report's method name."""
    if not reports:
        raise ValueError("need at least one report")
    axis = axis or choose_axis(reports)
    if axis not in ("time", "iterations"):
        raise ValueError("axis must be 'time' or 'iterations'")
    labels = labels or [str(r.get("method", f"run {i}")) for i, r in enumerate(reports)]
    series = [_series(r, axis) for r in reports]

    x_max = max(max(xs) for xs, _ in series) or 1.0
    y_lo = math.floor(min(min(ys) for _, ys in series))
    y_hi = math.ceil(max(max(ys) for _, ys in series))
    if y_hi == y_lo:
        y_hi = y_lo + 1
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(x):
        return LEFT + pw * x / x_max

    def sy(y):
        return TOP + ph * (y_hi - y) / (y_hi - y_lo)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    step = max(1, math.ceil((y_hi - y_lo) / 8))
    for d in range(y_lo, y_hi + 1, step):
        y = _fmt(sy(d))
        out.append(f'<line x1="{LEFT - 4}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 6}" y="{y}" text-anchor="end" '
                   f'dominant-baseline="middle">1e{d}</text>')
    for i in range(5):
        xv = x_max * i / 4
        x = _fmt(sx(xv))
        label = f"{xv:.3g}" if axis == "time" else str(int(round(xv)))
        out.append(f'<line x1="{x}" y1="{TOP + ph}" x2="{x}" y2="{TOP + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{TOP + ph + 18}" text-anchor="middle">{label}</text>')
    xlabel = "CPU time (s)" if axis == "time" else "iteration"
    out.append(f'<text x="{_fmt(LEFT + pw / 2)}" y="{HEIGHT - 10}" '
               f'text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{_fmt(TOP + ph / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 16 {_fmt(TOP + ph / 2)})">relative error E</text>')

    for i, ((xs, ys), label) in enumerate(zip(series, labels)):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = TOP + 10 + 18 * i
        lx = WIDTH - RIGHT + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{lx + 26}" y="{ly}" dominant-baseline="middle" '
                   f'class="legend">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
