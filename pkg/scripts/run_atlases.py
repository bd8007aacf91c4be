"""Render the standard set of bifurcation atlases through the CLI.

Each item of ``--labels`` is ``label[:l[:signs]]``. The defaults add the
Morse-tail variants printed next to 2B3 and 2C3.

    python3 scripts/run_atlases.py [--out out] [--res 81] [--labels 2A1,2B3:4:+,...]
"""

import argparse
import sys
import time

from retfront.cli import main as cli

LABELS = "2A1,2A2,2A3,2B2,2B3,2C3+,2C3-,2B3:4:+,2C3+:4:+,2C3-:4:+"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out")
    ap.add_argument("--res", type=int, default=81)
    ap.add_argument("--delta", type=float, default=0.5)
    ap.add_argument("--labels", default=LABELS)
    args = ap.parse_args()
    status = 0
    for item in args.labels.split(","):
        label, *rest = item.split(":")
        extra = ["--l", rest[0]] if rest else []
        extra += ["--signs", rest[1]] if len(rest) > 1 else []
        t0 = time.perf_counter()
        code = cli(["atlas", "--label", label, "--out", args.out,
                    "--res", str(args.res), "--delta", str(args.delta)] + extra)
        print(f"{item}: exit {code}, {time.perf_counter() - t0:.1f} s", flush=True)
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main())
