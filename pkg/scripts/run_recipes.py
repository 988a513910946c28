#!/usr/bin/env python3
"""Solve every shipped recipe and drop one CSV per recipe into results/."""
import sys
from pathlib import Path

from v2xmac.cli import RECIPES, main

ROOT = Path(__file__).resolve().parent.parent


def run(out_dir="results", jobs=1):
    out = ROOT / out_dir
    out.mkdir(exist_ok=True)
    for name in sorted(RECIPES):
        cfg = ROOT / "recipes" / f"{name}.cfg"
        csv = out / f"{name}.csv"
        code = main(["solve", "--config", str(cfg), "--out", str(csv),
                     "--jobs", str(jobs)])
        status = "ok" if code == 0 else f"exit {code}"
        print(f"{name}: {status} -> {csv}")
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    jobs = int(sys.argv[1]) if len(sys.argv) > 1 else 1
    sys.exit(run(jobs=jobs))
