"""Benchmark harness: run plans over the problem grid, emit CSV/markdown
tables, and the `condgrad` command line (subcommands bench, solve, check)."""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .core import Status
from .problems import ProblemSpec, build_instance, lipschitz_upper_bound, make_feasible_set
from .solvers import (
    SolverConfig,
    Trace,
    solve_cgm,
    solve_cgmi,
    solve_cgmil,
    solve_cgmis,
    solve_cgms,
)

METHOD_ORDER = ("cgm", "cgms", "cgmi", "cgmis", "cgmil")

CSV_HEADER = "series,method,m,n,it,kf,kg,restarts,f_final,mu_final,status,wall_ms"

_SERIES_TITLES = {
    1: "quadratic form",
    2: "quadratic form plus inverse barrier",
    3: "least squares",
    4: "least squares plus inverse barrier",
}


@dataclass(frozen=True)
class RunRow:
    """One benchmark result, mirroring the CSV column layout."""

    series: int
    method: str
    m: int
    n: int
    it: int
    kf: int
    kg: int
    restarts: int
    f_final: float
    mu_final: float
    status: str
    wall_ms: float


@dataclass(frozen=True)
class BenchPlan:
    """A grid of problem instances crossed with solver methods."""

    cells: tuple
    methods: tuple
    config: SolverConfig
    output_format: str = "csv"
    output_path: Optional[str] = None
    repetitions: int = 1  # timing only; counters are deterministic

    def __post_init__(self):
        if not self.cells or not self.methods:
            raise ValueError("a plan needs at least one cell and one method")
        if self.output_format not in ("csv", "md"):
            raise ValueError(f"format must be csv or md, got {self.output_format!r}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        for m in self.methods:
            if m not in METHOD_ORDER:
                raise ValueError(f"unknown method {m!r}")


_DEFAULT_SQUARE_SIZES = (5, 10, 20, 50, 100)
_DEFAULT_RECT_SHAPES = ((2, 5), (5, 10), (10, 20), (25, 50), (50, 100))


def default_plan(include_cgmil: bool = False,
                 config: Optional[SolverConfig] = None,
                 series: Optional[int] = None,
                 m: Optional[int] = None,
                 n: Optional[int] = None) -> BenchPlan:
    """The standard benchmark grid: series 1-2 at n in {5,10,20,50,100},
    series 3-4 at (m,n) in {(2,5),(5,10),(10,20),(25,50),(50,100)}, with
    methods cgm, cgms, cgmi, cgmis (cgmil only behind its flag), b = 10.

    `series`, `m`, `n` restrict the grid to matching cells.
    """
    cells = []
    for s in (1, 2):
        for size in _DEFAULT_SQUARE_SIZES:
            cells.append(ProblemSpec(series=s, n=size))
    for s in (3, 4):
        for rows, cols in _DEFAULT_RECT_SHAPES:
            cells.append(ProblemSpec(series=s, n=cols, m=rows))
    if series is not None:
        cells = [c for c in cells if c.series == series]
    if n is not None:
        cells = [c for c in cells if c.n == n]
    if m is not None:
        cells = [c for c in cells if c.rows == m]
    if not cells:
        raise ValueError("no default-plan cells match the requested restriction")
    methods = ("cgm", "cgms", "cgmi", "cgmis") + (("cgmil",) if include_cgmil else ())
    return BenchPlan(cells=tuple(cells), methods=methods,
                     config=config or SolverConfig())


def run_single(spec: ProblemSpec, method: str, config: SolverConfig,
               trace: Optional[Trace] = None):
    """Run one (instance, method) pair. Returns (RunRow, SolveReport or None);
    the report is None when the solve raised (the row then carries Error)."""
    started = time.perf_counter()
    try:
        objective, feasible, x0 = build_instance(spec)
        if method == "cgm":
            report = solve_cgm(objective, feasible, config, x0, trace=trace)
        elif method == "cgms":
            report = solve_cgms(objective, feasible, config, x0, trace=trace)
        elif method == "cgmi":
            report = solve_cgmi(objective, feasible, config, x0, trace=trace)
        elif method == "cgmis":
            report = solve_cgmis(objective, feasible, config, x0, trace=trace)
        elif method == "cgmil":
            L = lipschitz_upper_bound(spec, make_feasible_set(spec))
            report = solve_cgmil(objective, feasible, config, x0, L, trace=trace)
        else:
            raise ValueError(f"unknown method {method!r}")
    except Exception as exc:
        wall = 1e3 * (time.perf_counter() - started)
        print(f"condgrad: series {spec.series} m={spec.rows} n={spec.n} "
              f"{method}: {exc}", file=sys.stderr)
        row = RunRow(spec.series, method, spec.rows, spec.n, 0, 0, 0, 0,
                     math.nan, math.nan, Status.ERROR.value, wall)
        return row, None
    wall = 1e3 * (time.perf_counter() - started)
    c = report.counters
    row = RunRow(spec.series, method, spec.rows, spec.n, c.it, c.kf, c.kg,
                 c.restarts, report.f, report.gap, report.status.value, wall)
    return row, report


def run_plan(plan: BenchPlan):
    """Execute every (cell, method) pair of the plan.

    Rows come back ordered by (series, size, method in plan order); failures
    become status=Error rows and never abort the rest of the plan. With
    repetitions > 1 the counters are taken from the first run (they are
    deterministic) and wall_ms is the minimum across repetitions.
    """
    cells = sorted(plan.cells, key=lambda c: (c.series, c.rows, c.n))
    rows = []
    for spec in cells:
        for method in plan.methods:
            row, _ = run_single(spec, method, plan.config)
            best_wall = row.wall_ms
            for _ in range(plan.repetitions - 1):
                again, _ = run_single(spec, method, plan.config)
                best_wall = min(best_wall, again.wall_ms)
            if plan.repetitions > 1:
                row = dataclasses.replace(row, wall_ms=best_wall)
            rows.append(row)
    return rows


def _fmt_float(v: float) -> str:
    return f"{v:.6g}"


def _csv_line(row: RunRow) -> str:
    return ",".join([
        str(row.series), row.method, str(row.m), str(row.n), str(row.it),
        str(row.kf), str(row.kg), str(row.restarts), _fmt_float(row.f_final),
        _fmt_float(row.mu_final), row.status, _fmt_float(row.wall_ms),
    ])


def format_rows_csv(rows) -> str:
    return "\n".join([CSV_HEADER] + [_csv_line(r) for r in rows]) + "\n"


def format_rows_markdown(rows) -> str:
    """One table per series; within a table, method blocks in canonical
    order, sizes ascending inside each block."""
    out = []
    for series in sorted({r.series for r in rows}):
        chunk = [r for r in rows if r.series == series]
        chunk.sort(key=lambda r: (METHOD_ORDER.index(r.method), r.m, r.n))
        out.append(f"## Series {series}: {_SERIES_TITLES.get(series, '')}".rstrip())
        out.append("")
        out.append("| method | m | n | it | kf | kg | restarts | f_final | mu_final | status | wall_ms |")
        out.append("|---|---|---|---|---|---|---|---|---|---|---|")
        for r in chunk:
            out.append(
                f"| {r.method} | {r.m} | {r.n} | {r.it} | {r.kf} | {r.kg} "
                f"| {r.restarts} | {_fmt_float(r.f_final)} | {_fmt_float(r.mu_final)} "
                f"| {r.status} | {_fmt_float(r.wall_ms)} |")
        out.append("")
    return "\n".join(out)


def emit_table(rows, fmt: str = "csv", destination=None) -> None:
    """Write rows as CSV or markdown to a path, a file object, or stdout.

    Refuses empty row lists before touching the destination.
    """
    if not rows:
        raise ValueError("refusing to emit an empty table")
    if fmt == "csv":
        text = format_rows_csv(rows)
    elif fmt == "md":
        text = format_rows_markdown(rows)
    else:
        raise ValueError(f"format must be csv or md, got {fmt!r}")
    if destination is None:
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)


# ---------------------------------------------------------------------------
# iterate traces

TRACE_HEADER = "k,lam,f,mu,stage,delta_p"


def _trace_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and math.isnan(v):
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def write_trace_csv(report, trace: Trace, destination) -> None:
    """Per-iterate records (it+1 of them, the terminal point included):
    columns k, lam, f, mu, stage, delta_p; unknown values stay empty."""
    lines = [TRACE_HEADER]
    last_stage = 1
    last_delta = math.nan
    for s in trace.steps:
        lines.append(",".join([
            str(s.k), _trace_cell(s.lam), _trace_cell(s.f_before),
            _trace_cell(s.mu), str(s.stage), _trace_cell(s.delta)]))
        last_stage, last_delta = s.stage, s.delta
    if report.stages:
        last_stage = report.stages[-1].stage
        last_delta = report.stages[-1].delta
    lines.append(",".join([
        str(report.counters.it), "", _trace_cell(report.f),
        _trace_cell(report.gap), str(last_stage), _trace_cell(last_delta)]))
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)


# ---------------------------------------------------------------------------
# command line

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, default=0.1, help="target gap (default 0.1)")
    p.add_argument("--beta", type=float, default=0.5, help="sufficient-decrease slope")
    p.add_argument("--theta", type=float, default=0.5, help="backtracking ratio")
    p.add_argument("--sigma", type=float, default=0.9, help="step shrink factor")
    p.add_argument("--nu", type=float, default=0.5, help="stage tolerance decrease")
    p.add_argument("--delta0", type=float, default=None,
                   help="initial stage tolerance (default: max(eps, nu*gap(x0)))")
    p.add_argument("--tau0", type=float, default=0.9, help="initial step ceiling")
    p.add_argument("--max-iter", type=int, default=1_000_000, dest="max_iter",
                   help="iteration cap per run")
    p.add_argument("--dump-config", action="store_true",
                   help="print the fully resolved solver configuration as JSON")


def _config_from_args(parser: argparse.ArgumentParser,
                      args: argparse.Namespace) -> SolverConfig:
    try:
        return SolverConfig(beta=args.beta, theta=args.theta, sigma=args.sigma,
                            nu=args.nu, eps=args.eps, delta0=args.delta0,
                            tau0=args.tau0, max_iterations=args.max_iter)
    except ValueError as exc:
        parser.error(str(exc))


def _maybe_dump_config(args: argparse.Namespace, config: SolverConfig) -> None:
    if args.dump_config:
        print(json.dumps(dataclasses.asdict(config), sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="condgrad",
        description="Projection-free conditional gradient benchmarks on the scaled simplex")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run a benchmark plan and emit a table")
    _add_config_flags(bench)
    bench.add_argument("--series", type=int, choices=(1, 2, 3, 4),
                       help="restrict the grid to one series")
    bench.add_argument("--m", type=int, help="restrict the grid to one row count")
    bench.add_argument("--n", type=int, help="restrict the grid to one dimension")
    bench.add_argument("--format", choices=("csv", "md"), default="csv")
    bench.add_argument("--out", help="output path (default: stdout)")
    bench.add_argument("--include-cgmil", action="store_true",
                       help="add the fixed-step method to the grid")

    solve = sub.add_parser("solve", help="run one instance with one method")
    solve.add_argument("--series", type=int, required=True, choices=(1, 2, 3, 4))
    solve.add_argument("--m", type=int, help="row count (series 3-4)")
    solve.add_argument("--n", type=int, required=True)
    solve.add_argument("--method", required=True, choices=METHOD_ORDER)
    _add_config_flags(solve)
    solve.add_argument("--format", choices=("csv", "md"), default="csv")
    solve.add_argument("--out", help="output path for the result row (default: stdout)")
    solve.add_argument("--trace", help="write per-iteration records as CSV to this path")

    check = sub.add_parser("check", help="run the acceptance test suite")
    check.add_argument("--tests-dir", default=None,
                       help="directory holding test_acceptance.py (default: ./tests "
                            "or the repository checkout next to the package)")
    return parser


def _cmd_bench(parser, args) -> int:
    config = _config_from_args(parser, args)
    _maybe_dump_config(args, config)
    try:
        plan = default_plan(include_cgmil=args.include_cgmil, config=config,
                            series=args.series, m=args.m, n=args.n)
    except ValueError as exc:
        parser.error(str(exc))
    rows = run_plan(plan)
    emit_table(rows, fmt=args.format, destination=args.out)
    return 1 if any(r.status == Status.ERROR.value for r in rows) else 0


def _cmd_solve(parser, args) -> int:
    config = _config_from_args(parser, args)
    _maybe_dump_config(args, config)
    try:
        spec = ProblemSpec(series=args.series, n=args.n, m=args.m)
    except ValueError as exc:
        parser.error(str(exc))
    trace = Trace() if args.trace else None
    row, report = run_single(spec, args.method, config, trace=trace)
    if report is None:
        return 1
    if args.trace:
        write_trace_csv(report, trace, args.trace)
    emit_table([row], fmt=args.format, destination=args.out)
    return 0


def _locate_acceptance_tests(tests_dir: Optional[str]) -> Path:
    candidates = []
    if tests_dir is not None:
        candidates.append(Path(tests_dir))
    else:
        candidates.append(Path.cwd() / "tests")
        candidates.append(Path(__file__).resolve().parents[2] / "tests")
    for c in candidates:
        if (c / "test_acceptance.py").is_file():
            return c / "test_acceptance.py"
        if c.is_file():
            return c
    raise FileNotFoundError(
        "could not find test_acceptance.py; pass --tests-dir")


def _cmd_check(parser, args) -> int:
    import pytest

    try:
        target = _locate_acceptance_tests(args.tests_dir)
    except FileNotFoundError as exc:
        print(f"condgrad: {exc}", file=sys.stderr)
        return 1
    code = pytest.main(["-v", str(target)])
    return 0 if code == 0 else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench":
        return _cmd_bench(parser, args)
    if args.command == "solve":
        return _cmd_solve(parser, args)
    if args.command == "check":
        return _cmd_check(parser, args)
    parser.error(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
