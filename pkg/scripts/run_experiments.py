#!/usr/bin/env python3
"""Run the full verification suite at one or more bounds and print the
summary tables, optionally saving the structured reports.

Examples:
    python scripts/run_experiments.py
    python scripts/run_experiments.py --maxcard 1 2 --budget 20000 --out-dir out/
"""

import argparse
import json
import pathlib

from permcheck.statespace import Bounds, SystemSpace
from permcheck.verifier import run_suite


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--apps", type=int, default=2)
    ap.add_argument("--perms", type=int, default=2)
    ap.add_argument("--grps", type=int, default=2)
    ap.add_argument("--maxcard", type=int, nargs="+", default=[2])
    ap.add_argument("--budget", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--suite", default="all",
                    choices=("invariance", "security", "all"))
    ap.add_argument("--out-dir", help="write one report JSON per bounds here")
    args = ap.parse_args()

    for mc in args.maxcard:
        bounds = Bounds(apps=args.apps, perms=args.perms, grps=args.grps,
                        max_card=mc, budget=args.budget, seed=args.seed)
        space = SystemSpace(bounds)
        print(f"== state space: {space.size:,} systems "
              f"(apps={bounds.apps} perms={bounds.perms} grps={bounds.grps} "
              f"maxcard={mc}) ==")
        report = run_suite(args.suite, bounds)
        print(report.text())
        if args.out_dir:
            out = pathlib.Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"report_mc{mc}.json"
            path.write_text(json.dumps(report.to_doc(), indent=2) + "\n")
            print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
