"""Compare elimination fronts against the brute-force lattice scan.

For each family and time node prints the matched one-sided distance
used by the acceptance suite and the raw symmetric Hausdorff distance.

    python3 scripts/oracle_compare.py [--pitch 0.02] [--grid 151] [--count 5]
"""

import argparse

import numpy as np

from retfront.catalog import instantiate
from retfront.front import (brute_force_front, build_chart, hausdorff, oracle_distance,
                            sample_front, strata)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pitch", type=float, default=0.02)
    ap.add_argument("--grid", type=int, default=151)
    ap.add_argument("--count", type=int, default=5, help="time values per axis")
    ap.add_argument("--labels", default="2A1:1,2A2:2,2B2:2")
    args = ap.parse_args()
    ts = np.linspace(-0.5, 0.5, args.count)
    print(f"{'family':<6} {'t':<16} {'stratum':<8} {'matched':>8} {'raw':>8}")
    worst = 0.0
    for item in args.labels.split(","):
        label, l = item.split(":")
        F = instantiate(label, int(l))
        for t1 in ts:
            for t2 in ts:
                t = (float(t1), float(t2))
                for s in strata(F.space.r):
                    elim = sample_front(build_chart(F, s), t, grid=args.grid)
                    brute = brute_force_front(F, s, t, pitch=args.pitch)
                    d = oracle_distance(elim, brute, args.pitch)
                    raw = hausdorff(elim.points(), brute.points())
                    worst = max(worst, d)
                    print(f"{label:<6} ({t1:+.2f},{t2:+.2f})   {s.key:<8} {d:8.4f} {raw:8.4f}", flush=True)
    print(f"worst matched distance {worst:.4f} (bound {2 * args.pitch})")


if __name__ == "__main__":
    main()
