#!/usr/bin/env python3
"""Run every bundled demonstration scenario and collect the artifacts.

Writes CSV, SVG, stability report, and the assumption note for each
scenario under the output directory (default ./figures). The stochastic
scenarios take a few seconds each.

    python3 scripts/reproduce_figures.py
    python3 scripts/reproduce_figures.py --out-dir /tmp/figs --only fig3
"""

import argparse
import time
from pathlib import Path

from sismob.cli import FIGURES, reproduce_figure


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="figures")
    ap.add_argument("--only", nargs="*", default=None,
                    help=f"subset of: {', '.join(FIGURES)}")
    ap.add_argument("--format", default="all", choices=("csv", "svg", "json", "all"))
    args = ap.parse_args()

    targets = args.only if args.only else FIGURES
    out = Path(args.out_dir)
    for name in targets:
        t0 = time.perf_counter()
        reproduce_figure(name, out, fmt=args.format)
        print(f"{name}: done in {time.perf_counter() - t0:.1f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
