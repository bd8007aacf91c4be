"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import json
import re
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest
import sympy
from scipy.spatial import cKDTree

sys.path.insert(0, str(Path(__file__).parent))

from expected_templates import TEMPLATES  # noqa: E402
from oracles import determinacy_oracle, versality_oracle  # noqa: E402

from retfront.catalog import (  # noqa: E402
    all_entries,
    delete_coupling_term,
    delete_slot_term,
    instantiate,
    minimal_instance,
)
from retfront.cli import main as cli_main  # noqa: E402
from retfront.cli import cmd_list, resolve  # noqa: E402
from retfront.front import (  # noqa: E402
    EPS_RES,
    Stratum,
    brute_force_front,
    build_chart,
    full_front,
    hausdorff,
    oracle_distance,
    residuals,
    sample_front,
    strata,
)
from retfront.jetalgebra import (  # noqa: E402
    is_K_determined,
    is_PR_versal,
    is_tPK_infinitesimally_stable,
    stability_order,
    tangent_jet_check,
)
from retfront.polyring import Poly, VarSpace  # noqa: E402

# entries whose printed form is replaced by the pattern-consistent variant
FLAGGED = {"2D6", "2B3", "2B4", "2C3"}
PITCH = 0.02


def _signs(e):
    return [1, -1] if e.signed else [1]


def _squash(s):
    return re.sub(r"\s+", "", s)


# ------------------------------------------------------------------ criteria
def criterion_1():
    t0 = time.perf_counter()
    buf = io.StringIO()
    cmd_list(resolve(["list", "--format", "json"]), buf)
    text = io.StringIO()
    cmd_list(resolve(["list"]), text)
    dt = time.perf_counter() - t0
    rows = json.loads(buf.getvalue())
    by_r = [sum(1 for r in rows if r["r"] == k) for k in (0, 1)]
    got = {r["label"].removesuffix("pm"): [_squash(t) for t in r["templates"]] for r in rows}
    want = {k: [_squash(t) for t in v] for k, v in TEMPLATES.items()}
    printed = all(_squash(t) in _squash(text.getvalue()) for v in TEMPLATES.values() for t in v)
    ok = len(rows) == 16 and by_r == [10, 6] and got == want and printed and dt < 1.0
    return ok, f"{len(rows)} entries ({by_r[0]}+{by_r[1]}), templates verbatim={got == want}, {dt:.3f} s"


def criterion_2():
    bad, worst, count, printed = [], 0.0, 0, []
    for e in all_entries():
        for s in _signs(e):
            if e.key in FLAGGED:
                P = minimal_instance(e, s)
                rep = is_tPK_infinitesimally_stable(P)
                coupled = not is_tPK_infinitesimally_stable(delete_coupling_term(P)).verdict
                printed.append(f"{P.name} stable={rep.verdict}"
                               + ("" if rep.verdict else f" witness={list(rep.witness)}")
                               + ("" if coupled else " coupling-redundant"))
            t0 = time.perf_counter()
            F = minimal_instance(e, s, pattern=e.key in FLAGGED)
            stable = is_tPK_infinitesimally_stable(F, exact=True).verdict
            slot = is_tPK_infinitesimally_stable(delete_slot_term(F)).verdict
            coup = is_tPK_infinitesimally_stable(delete_coupling_term(F)).verdict
            dt = time.perf_counter() - t0
            worst = max(worst, dt)
            count += 1
            if not stable or slot or coup or dt >= 60:
                bad.append(f"{F.name}(stable={stable},slot={slot},coupling={coup})")
    detail = (f"{count} minimal instances stable, both deletions flip; "
              f"pattern variant used for {sorted(FLAGGED)}; slowest {worst:.2f} s; "
              f"as printed: {'; '.join(printed)}")
    return not bad, detail if not bad else "failures: " + ", ".join(bad)


def criterion_3():
    y, x = sympy.symbols("y1 x1")
    cases = [((0, 1), "y1^3", 3, True, y**3, [], [y]),
             ((0, 1), "y1^3", 2, False, y**3, [], [y]),
             ((1, 0), "x1^2", 2, True, x**2, [x], [])]
    out = []
    ok = True
    for (r, k), text, l, want, expr, xs, ys in cases:
        got = is_K_determined(Poly.from_text(VarSpace(r, k), text), l).verdict
        oracle = determinacy_oracle(expr, xs, ys, l)
        ok &= got is want and oracle is want
        out.append(f"({text},{l})={got}/oracle={oracle}")
    return ok, ", ".join(out)


def criterion_4():
    sp = VarSpace(0, 0, 1, 2)
    u, t1, t2 = sympy.symbols("u1 t1 t2")
    a = is_PR_versal(Poly.from_text(sp, "t1 + t2*u1 + u1^3"))
    b = is_PR_versal(Poly.from_text(sp, "t1 + u1^3"))
    oa = versality_oracle(t1 + t2 * u + u**3, [u], [t1, t2], 4)
    ob = versality_oracle(t1 + u**3, [u], [t1, t2], 4)
    ok = (a.verdict and not b.verdict and b.witness == ("u1",)
          and oa == (True, []) and ob == (False, ["u1"]))
    return ok, f"versal={a.verdict}, t1+u^3: {b.verdict} witness={list(b.witness)}; oracle {oa}, {ob}"


def _front_instances():
    for e in all_entries():
        for s in _signs(e):
            yield minimal_instance(e, s)
            if e.key in FLAGGED:
                yield minimal_instance(e, s, pattern=True)


def criterion_5():
    total, worst_res, worst_t, bad = 0, 0.0, 0.0, []
    for F in _front_instances():
        t0 = time.perf_counter()
        for t in [(0.0, 0.0), (0.5, -0.5)]:
            for s, sh in full_front(F, t).items():
                r = residuals(F, sh)
                total += len(sh)
                worst_res = max(worst_res, r["F"], r["derivative"], r["corner"])
                if max(r["F"], r["derivative"], r["corner"], r["pinned"]) > EPS_RES:
                    bad.append(f"{F.name}{'(pattern)' if F.pattern else ''} {t} {s}")
        dt = time.perf_counter() - t0
        worst_t = max(worst_t, dt)
        if dt >= 30:
            bad.append(f"{F.name} took {dt:.1f} s")
    return not bad, (f"{total} samples, max residual {worst_res:.1e} (<= {EPS_RES:g}), "
                     f"slowest instance {worst_t:.2f} s" + ("; " + "; ".join(bad) if bad else ""))


def criterion_6():
    t0 = time.perf_counter()
    parts, ok = [], True
    for label, l in [("2A1", 1), ("2A2", 2), ("2B2", 2)]:
        F = instantiate(label, l)
        for t in [(0.0, 0.0), (0.5, -0.5)]:
            for s in strata(F.space.r):
                elim = sample_front(build_chart(F, s), t, grid=151)
                brute = brute_force_front(F, s, t, pitch=PITCH)
                d = oracle_distance(elim, brute, PITCH)
                raw = hausdorff(elim.points(), brute.points())
                ok &= d <= 2 * PITCH
                parts.append(f"{label}{t}{s}:{d:.4f}(raw {raw:.3f})")
    dt = time.perf_counter() - t0
    ok &= dt < 120
    return ok, f"bound {2 * PITCH}; " + " ".join(parts) + f"; {dt:.1f} s"


def criterion_7():
    F = instantiate("2B2", 2)
    pitch = 3.0 / 200
    ok, worst, nodes = True, 0.0, 0
    for t in [(a, b) for a in (-0.5, 0.0, 0.5) for b in (-0.5, 0.0, 0.5)]:
        ff = full_front(F, t)
        inner, bnd = ff[Stratum(())], ff[Stratum((1,))]
        nonempty = sum(1 for sh in ff.values() if len(sh))
        ok &= nonempty == 2
        edge = inner.column("x1") <= 1.5 / 200 + 1e-12
        pts = inner.points()[edge]
        d, _ = cKDTree(bnd.points()).query(pts)
        worst = max(worst, float(d.max()))
        ok &= d.max() <= 2 * pitch
        # every root of a(., t) in the box is reached by the interior sheet edge
        roots = [r.real for r in np.roots([1.0, 0.0, t[1], t[0]])
                 if abs(r.imag) < 1e-9 and abs(r.real) <= 1.5]
        u2 = inner.column("u2")[edge]
        for r in roots:
            ok &= bool(np.abs(u2 - r).min() <= 2 * pitch)
        a_edge = t[0] + t[1] * u2 + u2**3
        ok &= bool(np.abs(a_edge).max() <= 2 * pitch * (abs(t[1]) + 3 * 1.5**2))
        nodes += 1
    empty = full_front(F, (4.0, 0.0))
    ok &= sum(1 for sh in empty.values() if len(sh)) == 1
    return ok, (f"{nodes} time nodes with 2 non-empty sheets; interior edge to z=u1 sheet "
                f"<= {worst:.4f} (bound {2 * pitch:.3f}); a>0 gives 1 sheet")


LABELS = ["2A1", "2A2", "2A3", "2B2", "2B3", "2C3+", "2C3-"]


def _tree(root: Path) -> dict:
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def criterion_8():
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        trees, ok, parts = [], True, []
        for run in ("a", "b"):
            out = Path(tmp) / "out"
            if out.exists():
                for p in sorted(out.rglob("*"), reverse=True):
                    p.unlink() if p.is_file() else p.rmdir()
            for lab in LABELS:
                code = cli_main(["atlas", "--label", lab, "--out", str(out)])
                ok &= code == 0
                if run == "a":
                    svg = (out / lab / "atlas.svg").read_text(encoding="utf-8")
                    caption = instantiate(lab).label.pretty()
                    panels = svg.count('class="panel"')
                    has_caption = f'class="caption"' in svg and f">{caption}<" in svg
                    ok &= panels == 9 and has_caption
                    parts.append(f"{caption}:{panels}")
            trees.append(_tree(out))
        same = trees[0] == trees[1]
        ok &= same
    dt = time.perf_counter() - t0
    return ok, f"panels {' '.join(parts)}; reruns byte-identical={same}; {dt:.1f} s"


def criterion_9():
    F = instantiate("2A1", 1)
    sh = sample_front(build_chart(F, Stratum(())), (0.0, 0.0))
    pitch = 3.0 / 200
    pts = sh.points()
    d, _ = cKDTree(pts).query(-pts)
    ok = len(pts) > 0 and d.max() <= pitch and np.allclose(sh.z, sh.u[:, 0] ** 3)
    return ok, f"{len(pts)} samples, max distance to mirror {d.max():.2e} (pitch {pitch})"


def criterion_10():
    ok, parts = True, []
    for label, l in [("2A2", 2), ("2B2", 2)]:
        F = instantiate(label, l)
        N = stability_order(l, F.space.m)
        verdicts = [tangent_jet_check(F, k).verdict for k in range(1, N + 1)]
        ok &= verdicts[-1]
        for k, v in enumerate(verdicts, 1):
            if v:
                ok &= all(verdicts[:k])
        parts.append(f"{label}: orders 1..{N} -> {''.join('T' if v else 'F' for v in verdicts)}")
    return ok, "; ".join(parts)


CRITERIA = [
    (1, "catalog fidelity", criterion_1),
    (2, "stability suite", criterion_2),
    (3, "determinacy oracle", criterion_3),
    (4, "versality", criterion_4),
    (5, "front residuals", criterion_5),
    (6, "oracle front equivalence", criterion_6),
    (7, "corner stratification", criterion_7),
    (8, "atlas layout", criterion_8),
    (9, "odd symmetry", criterion_9),
    (10, "monotone order", criterion_10),
]


def line(n, name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2} {name}: {detail}"


@pytest.mark.parametrize("n,name,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(n, name, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + line(n, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n, name, fn in CRITERIA:
        ok, detail = fn()
        failed += not ok
        print(line(n, name, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
