"""Stability table for every catalog entry at every admissible l.

Prints the certificate verdict for the printed form and the pattern
variant, plus the verdicts after deleting the slot or coupling term.

    python3 scripts/validate_catalog.py [--max-l N] [--json out.json]
"""

import argparse
import json
import time

from retfront.catalog import all_entries, delete_coupling_term, delete_slot_term, instantiate
from retfront.jetalgebra import is_tPK_infinitesimally_stable


def verdict(F):
    return is_tPK_infinitesimally_stable(F).verdict


def rows(max_l):
    for e in all_entries():
        for sign in ([1, -1] if e.signed else [None]):
            for l in e.admissible():
                if l > max_l:
                    continue
                n = l - e.j
                tails = sorted({(1,) * n, (-1,) * n}, reverse=True)
                for tail in tails:
                    for pattern in sorted({False, bool(e.corrections)}):
                        yield check(e, sign, l, tail, pattern)


def check(e, sign, l, tail, pattern):
    t0 = time.perf_counter()
    F = instantiate(e.label(sign), l, tail, pattern)
    return {
        "family": F.name, "l": l, "tail": "".join("+" if s > 0 else "-" for s in tail),
        "pattern": pattern,
        "stable": verdict(F),
        "no_slot": verdict(delete_slot_term(F)),
        "no_coupling": verdict(delete_coupling_term(F)),
        "seconds": round(time.perf_counter() - t0, 3),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-l", type=int, default=6)
    ap.add_argument("--json")
    args = ap.parse_args()
    out = []
    print(f"{'family':<10} {'l':>2} {'tail':<5} {'pattern':<7} {'stable':<6} {'no_slot':<7} {'no_coupling':<11} secs")
    for r in rows(args.max_l):
        out.append(r)
        print(f"{r['family']:<10} {r['l']:>2} {r['tail']:<5} {str(r['pattern']):<7} {str(r['stable']):<6} "
              f"{str(r['no_slot']):<7} {str(r['no_coupling']):<11} {r['seconds']}", flush=True)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(out, fh, indent=1)


if __name__ == "__main__":
    main()
