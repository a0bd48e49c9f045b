"""Method comparison runs: LSPIA vs ALSPIA (and singular LSPIA on rank-deficient cases)."""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .datasets import gen_example, singular_mask
from .solver import FitConfig, Method, fit_curve, fit_surface, setup_curve, setup_surface

logger = logging.getLogger(__name__)

CAP_SENTINEL = ">10^4"
MISSING = "#"
COLUMNS = ("case", "method", "E_inf", "IT", "wall_seconds", "S_it", "S_cpu", "note")


@dataclass(frozen=True)
class Case:
    """One benchmark instance; ``holes`` asks for a rank-deficient mask (examples 3, 4)."""

    example: int
    m: int
    n: int
    p: int | None = None
    holes: bool = False

    @property
    def label(self) -> str:
        sizes = (self.m, self.n) if self.p is None else (self.m, self.p, self.n)
        tag = f"ex{self.example}(" + ",".join(map(str, sizes)) + ")"
        return tag + "+holes" if self.holes else tag

    @classmethod
    def parse(cls, text: str) -> "Case":
        """``ex:m:n``, ``ex:m:p:n`` (surfaces) or ``ex:m:n:holes``."""
        parts = text.strip().split(":")
        holes = parts[-1] == "holes"
        if holes:
            parts = parts[:-1]
        try:
            nums = [int(x) for x in parts]
        except ValueError:
            raise ValueError(f"bad case {text!r}; expected ex:m:n, ex:m:p:n or ex:m:n:holes") from None
        if len(nums) == 3:
            case = cls(nums[0], nums[1], nums[2], None, holes)
        elif len(nums) == 4 and not holes:
            case = cls(nums[0], nums[1], nums[3], nums[2])
        else:
            raise ValueError(f"bad case {text!r}; expected ex:m:n, ex:m:p:n or ex:m:n:holes")
        if min(nums) < 1:
            raise ValueError(f"bad case {text!r}: sizes must be positive")
        return case


DESK_CASES = tuple(Case.parse(s) for s in (
    "1:800:100", "1:800:200", "2:800:100", "2:1000:100",
    "3:1460:200:holes", "4:1889:300:holes", "5:50:50:30", "6:60:60:20",
))

FULL_CASES = tuple(Case.parse(s) for s in (
    "1:8000:1000", "1:8000:2000", "1:8000:3000", "1:10000:3000",
    "2:8000:1000", "2:8000:2000", "2:10000:1000", "2:10000:2000",
    "3:14600:2000:holes", "4:18897:3000:holes",
    "5:50:50:20", "5:60:60:20", "5:70:70:20", "5:80:80:20",
    "5:50:50:30", "5:60:60:30", "5:70:70:30", "5:80:80:30",
    "6:50:50:20", "6:80:80:20", "6:100:100:20", "6:100:100:30",
))


def _run_one(case: Case, config: FitConfig):
    """Fit every applicable method; returns ``{method: FitReport}``."""
    if case.example in (5, 6):
        g = gen_example(case.example, case.m, case.p)
        px, py, kx, ky = setup_surface(g.points, case.n)

        def run(cfg):
            return fit_surface(g.points, px, py, kx, ky, cfg)[0]
    else:
        mask = singular_mask(case.example, case.m, case.n) if case.holes else None
        g = gen_example(case.example, case.m, mask=mask)
        params, knots = setup_curve(g.points, case.n, g.kept, g.total)

        def run(cfg):
            return fit_curve(g.points, params, knots, cfg)[0]
    reports = {}
    for method in (Method.LSPIA, Method.ALSPIA):
        reports[method] = run(replace(config, method=method))
    if reports[Method.ALSPIA].rank == "deficient":
        reports[Method.SINGULAR_LSPIA] = run(replace(config, method=Method.SINGULAR_LSPIA))
    return reports


def _ratio(num, den):
    if num == den:
        return 1.0
    if den == 0:
        return float("inf")
    return num / den


def rows_for(case: Case, reports) -> list[dict]:
    """Table rows; baselines carry the speed-ups of ALSPIA over them."""
    ours = reports[Method.ALSPIA]
    rows = []
    for method, rep in reports.items():
        row = {
            "case": case.label,
            "method": method.value,
            "E_inf": f"{rep.final_error:.2e}" if rep.converged else MISSING,
            "IT": str(rep.iterations) if rep.converged else CAP_SENTINEL,
            "wall_seconds": f"{rep.wall_seconds:.4f}",
            "S_it": "",
            "S_cpu": "",
            "note": "",
        }
        if method is not Method.ALSPIA:
            if rep.converged and ours.converged:
                row["S_it"] = f"{_ratio(rep.iterations, ours.iterations):.3f}"
                row["S_cpu"] = f"{_ratio(rep.wall_seconds, ours.wall_seconds):.3f}"
            else:
                row["S_it"] = row["S_cpu"] = MISSING
        rows.append(row)
    return rows


def _failure_row(case: Case, exc: Exception) -> dict:
    return {"case": case.label, "method": "error", "E_inf": MISSING, "IT": MISSING,
            "wall_seconds": "", "S_it": MISSING, "S_cpu": MISSING,
            "note": f"{type(exc).__name__}: {exc}"}


def run_case(case: Case, config: FitConfig = FitConfig()) -> list[dict]:
    try:
        return rows_for(case, _run_one(case, config))
    except Exception as exc:  # noqa: BLE001 - one bad case must not stop the sweep
        logger.error("case %s failed: %s", case.label, exc)
        return [_failure_row(case, exc)]


def thread_cap(requested: int) -> int:
    env = os.environ.get("ALSPIA_THREADS")
    cap = requested
    if env:
        try:
            cap = min(cap, max(1, int(env)))
        except ValueError:
            logger.warning("ignoring non-integer ALSPIA_THREADS=%r", env)
    return max(1, cap)


def run_bench(cases, config: FitConfig = FitConfig(), jobs: int = 1) -> list[dict]:
    """Run all cases, in order; ``jobs > 1`` runs cases on a thread pool."""
    jobs = thread_cap(jobs)
    if jobs == 1:
        results = [run_case(c, config) for c in cases]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda c: run_case(c, config), cases))
    return [row for rows in results for row in rows]


def write_table(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def read_table(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
