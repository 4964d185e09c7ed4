"""Regenerate the three figure datasets into an output directory.

    python3 scripts/reproduce_figures.py --out results --trials 100000
"""

import argparse
import sys
from pathlib import Path

from macfusion.cli import main


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=2026)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--figures", nargs="+", default=["fig1", "fig2", "fig3"], choices=["fig1", "fig2", "fig3"])
    return p.parse_args(argv)


def run(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for fig in args.figures:
        argv = ["reproduce", fig, "-o", str(out / f"{fig}.csv"), "--seed", str(args.seed), "--workers", str(args.workers)]
        if fig != "fig1":
            argv += ["--trials", str(args.trials)]
        code = main(argv)
        if code:
            return code
        print(f"wrote {out / fig}.csv", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(run(parse_args()))
