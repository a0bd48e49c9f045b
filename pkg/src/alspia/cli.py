"""``alspia`` command line: generate, fit-curve, fit-surface, bench, plot.

Exit status is 0 on success, 1 on usage or input errors and 2 when a fit
stops at the iteration cap (the report is still written).
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .bench import COLUMNS, DESK_CASES, FULL_CASES, Case, run_bench, write_table
from .datasets import CURVE_IDS, SURFACE_IDS, gen_example, singular_mask
from .io import read_points, read_report, write_points, write_report
from .linops import EIGEN_SEED, EIGEN_TOL, RANK_THRESHOLD
from .plot import render_svg
from .solver import FitConfig, Method, fit_curve, fit_surface, setup_curve, setup_surface

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _parse_ranges(text):
    holes = []
    for part in text.split(","):
        a, sep, b = part.partition("-")
        if not sep:
            raise argparse.ArgumentTypeError(f"bad range {part!r}; expected a-b")
        holes.append((int(a), int(b)))
    return tuple(holes)


def _add_fit_options(p):
    p.add_argument("input", help="point file written by 'generate'")
    p.add_argument("--n", type=_positive_int, required=True, help="index of the last control point")
    p.add_argument("--method", choices=[m.value for m in Method], default=Method.ALSPIA.value)
    p.add_argument("--tol", type=_positive_float, default=1e-6)
    p.add_argument("--max-iter", type=_positive_int, default=10_000)
    p.add_argument("--cycle-k", type=_positive_int, default=None,
                   help="Chebyshev cycle length (default: chosen from the spectrum)")
    p.add_argument("--regime", choices=["auto", "singular", "nonsingular"], default="auto",
                   help="force a step schedule instead of detecting the rank")
    p.add_argument("--eigen-tol", type=_positive_float, default=EIGEN_TOL)
    p.add_argument("--rank-threshold", type=_positive_float, default=RANK_THRESHOLD)
    p.add_argument("-r", "--report", required=True, help="JSON report path")
    p.add_argument("-c", "--controls", help="controls CSV path")
    p.add_argument("--no-timing", action="store_true", help="record all times as 0")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="alspia", description="Progressive iterative B-spline fitting.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample an example geometry to a point file")
    g.add_argument("--example", type=int, required=True, choices=CURVE_IDS + SURFACE_IDS)
    g.add_argument("--m", type=_positive_int, required=True)
    g.add_argument("--p", type=_positive_int, help="second grid size (surfaces; default m)")
    g.add_argument("--holes", help="inclusive index ranges 'a-b,c-d', or 'auto' (needs --n)")
    g.add_argument("--n", type=_positive_int, help="control count used by --holes auto")
    g.add_argument("-o", "--output", required=True)

    _add_fit_options(sub.add_parser("fit-curve", help="fit a cubic B-spline curve"))
    _add_fit_options(sub.add_parser("fit-surface", help="fit a bicubic B-spline surface"))

    b = sub.add_parser("bench", help="compare LSPIA and ALSPIA on example cases")
    b.add_argument("--case", action="append", type=Case.parse, default=None,
                   help="ex:m:n, ex:m:p:n or ex:m:n:holes (repeatable)")
    b.add_argument("--paper-scale", action="store_true", help="use the full-size case list")
    b.add_argument("--tol", type=_positive_float, default=1e-6)
    b.add_argument("--max-iter", type=_positive_int, default=10_000)
    b.add_argument("--jobs", type=_positive_int, default=1,
                   help="cases run concurrently (capped by ALSPIA_THREADS)")
    b.add_argument("--no-timing", action="store_true")
    b.add_argument("-o", "--output", help="CSV path (default: stdout)")

    pl = sub.add_parser("plot", help="SVG of relative error against time")
    pl.add_argument("reports", nargs="+")
    pl.add_argument("--axis", choices=["time", "iterations"], default=None,
                    help="x axis (default: time, or iterations when no times were recorded)")
    pl.add_argument("--labels", help="comma-separated legend labels")
    pl.add_argument("-o", "--output", required=True)
    return parser


def cmd_generate(args) -> int:
    is_surface = args.example in SURFACE_IDS
    if is_surface and args.holes:
        raise UsageError("holes are only supported for curve examples")
    holes = None
    if args.holes == "auto":
        if args.n is None:
            raise UsageError("--holes auto needs --n")
        holes = singular_mask(args.example, args.m, args.n)
    elif args.holes:
        try:
            holes = _parse_ranges(args.holes)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(str(exc)) from None
    g = gen_example(args.example, args.m, args.p, mask=holes)
    if is_surface:
        write_points(args.output, g.points, kind="surface")
    else:
        write_points(args.output, g.points, kind="curve", m=args.m, holes=g.holes)
    return EXIT_OK


def _config(args) -> FitConfig:
    return FitConfig(method=args.method, tolerance=args.tol, max_iterations=args.max_iter,
                     cycle_k=args.cycle_k, eigen_tol=args.eigen_tol,
                     rank_threshold=args.rank_threshold,
                     regime=None if args.regime == "auto" else args.regime,
                     timing=not args.no_timing)


def _finish_fit(args, report, controls, sizes) -> int:
    out = {"method": report.method, **sizes}
    out.update(report.to_dict())
    out["seed"] = EIGEN_SEED
    write_report(args.report, out)
    if args.controls:
        kind_args = {"m": args.n, "p": args.n} if controls.ndim == 3 else {"m": args.n}
        write_points(args.controls, controls, kind="controls", **kind_args)
    if not report.converged:
        print(f"alspia: not converged after {report.iterations} iterations "
              f"(E = {report.final_error:.3e})", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_fit_curve(args) -> int:
    pf = read_points(args.input)
    if pf.is_grid:
        raise UsageError(f"{args.input} holds a surface grid; use fit-surface")
    if args.n > pf.m:
        raise UsageError(f"need m >= n, got m={pf.m}, n={args.n}")
    params, knots = setup_curve(pf.points, args.n, pf.kept, pf.m + 1)
    report, controls = fit_curve(pf.points, params, knots, _config(args))
    return _finish_fit(args, report, controls, {"m": pf.m, "n": args.n})


def cmd_fit_surface(args) -> int:
    pf = read_points(args.input)
    if not pf.is_grid:
        raise UsageError(f"{args.input} holds a curve; use fit-curve")
    if args.n > min(pf.m, pf.p):
        raise UsageError(f"need m, p >= n, got m={pf.m}, p={pf.p}, n={args.n}")
    px, py, kx, ky = setup_surface(pf.points, args.n)
    report, controls = fit_surface(pf.points, px, py, kx, ky, _config(args))
    return _finish_fit(args, report, controls, {"m": pf.m, "n": args.n, "p": pf.p})


def cmd_bench(args) -> int:
    cases = args.case or (FULL_CASES if args.paper_scale else DESK_CASES)
    config = FitConfig(tolerance=args.tol, max_iterations=args.max_iter,
                       timing=not args.no_timing)
    rows = run_bench(cases, config, args.jobs)
    if args.output:
        write_table(args.output, rows)
    else:
        print(",".join(COLUMNS))
        for row in rows:
            print(",".join(str(row[c]) for c in COLUMNS))
    return EXIT_OK


def cmd_plot(args) -> int:
    reports = [read_report(path) for path in args.reports]
    labels = args.labels.split(",") if args.labels else None
    if labels is not None and len(labels) != len(reports):
        raise UsageError(f"{len(labels)} labels for {len(reports)} reports")
    svg = render_svg(reports, labels, args.axis)
    with open(args.output, "w", newline="\n") as fh:
        fh.write(svg)
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "fit-curve": cmd_fit_curve,
            "fit-surface": cmd_fit_surface, "bench": cmd_bench, "plot": cmd_plot}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, OSError, RuntimeError) as exc:
        print(f"alspia {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
