#!/usr/bin/env python3
"""Analytics-vs-simulation comparison at the default highway scenario.

Writes results/compare_defaults.csv for N in {10, 50, 100} and both
technologies. Mirrors the cross-validation sweep used by the acceptance
suite but with tunable effort.
"""
import argparse
import sys
from pathlib import Path

from v2xmac.cli import COMPARE_HEADER, COMPARE_SCHEMA, _compare_rows
from v2xmac.config import ScenarioConfig

ROOT = Path(__file__).resolve().parent.parent


def run(seed, duration_s, replications, jobs, out):
    lines = [COMPARE_SCHEMA, COMPARE_HEADER]
    for n in (10, 50, 100):
        scenario = ScenarioConfig().with_value("n", n).validate()
        for tech in ("cv2x", "dot11p"):
            for row in _compare_rows(tech, scenario, seed, duration_s,
                                     replications, jobs):
                lines.append(",".join(str(c) for c in row))
    out.parent.mkdir(exist_ok=True)
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--duration-s", type=float, default=60.0)
    ap.add_argument("--replications", type=int, default=20)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=ROOT / "results" / "compare_defaults.csv")
    a = ap.parse_args()
    sys.exit(run(a.seed, a.duration_s, a.replications, a.jobs, a.out))
