#!/usr/bin/env python3
"""Run the full benchmark grid and write CSV plus markdown tables.

Usage:
    python scripts/run_benchmarks.py [--out-dir results] [--include-cgmil]
"""

import argparse
import sys
from pathlib import Path

from condgrad.harness import default_plan, emit_table, run_plan


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--include-cgmil", action="store_true",
                    help="add the fixed-step method to the grid")
    ap.add_argument("--eps", type=float, default=0.1)
    args = ap.parse_args()

    from condgrad.solvers import SolverConfig

    plan = default_plan(include_cgmil=args.include_cgmil,
                        config=SolverConfig(eps=args.eps))
    rows = run_plan(plan)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    emit_table(rows, "csv", out / "benchmarks.csv")
    emit_table(rows, "md", out / "benchmarks.md")

    converged = sum(r.status == "Converged" for r in rows)
    total_ms = sum(r.wall_ms for r in rows)
    print(f"{converged}/{len(rows)} runs converged, {total_ms / 1e3:.1f}s of solve time")
    print(f"tables written to {out / 'benchmarks.csv'} and {out / 'benchmarks.md'}")
    return 0 if converged == len(rows) else 1


if __name__ == "__main__":
    sys.exit(main())
