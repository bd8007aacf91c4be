"""Stratified wavefronts of a generating family on an r-corner.

For a face ``sigma`` of the corner the front sheet is the image in (u, z) of

    x_sigma = 0,  dF/dx_i = 0 (i not in sigma),  dF/dy = 0,  x_i >= 0,

with ``z = F`` there (the family's ``-z`` term is implicit).  A chart
eliminates what it can exactly: every critical equation that is linear with a
constant coefficient in some base or internal variable is solved for it
(base variables first, ascending index).  At most one equation may be left
over; it becomes a residual constraint, located numerically by sign changes
on sweep-lattice edges and refined by bisection along the edge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np
from scipy.ndimage import maximum_filter, minimum_filter

from .polyring import Poly

BOX = 1.5
STEPS = 201
EPS_RES = 1e-9
BISECT_ITERS = 64


class ChartError(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class Stratum:
    sigma: tuple = ()

    def __str__(self):
        return "{" + ",".join(map(str, self.sigma)) + "}" if self.sigma else "{}"

    @property
    def key(self) -> str:
        return "s" + "".join(map(str, self.sigma)) if self.sigma else "s"


def strata(r: int) -> list[Stratum]:
    """All 2^r faces of the r-corner, by size then lexicographically."""
    if r < 0:
        raise ValueError("r must be >= 0")
    out = []
    for size in range(r + 1):
        out.extend(Stratum(c) for c in combinations(range(1, r + 1), size))
    return out


@dataclass(frozen=True)
class SweepAxis:
    name: str
    lo: float
    hi: float

    def values(self, steps: int) -> np.ndarray:
        if steps < 2:
            return np.array([0.5 * (self.lo + self.hi)])
        v = np.linspace(self.lo, self.hi, steps)
        v[np.abs(v) < 1e-12 * (self.hi - self.lo)] = 0.0
        return v


@dataclass
class FrontChart:
    family: object
    stratum: Stratum
    solved: dict            # variable name -> Poly over the sweep variables and t
    sweep: list             # SweepAxis, canonical variable order
    z: Poly
    residual: Poly | None = None
    equations: list = field(default_factory=list)   # the original critical equations
    box: float = BOX

    @property
    def space(self):
        return self.z.space

    @property
    def constraint_vars(self) -> list[str]:
        if self.residual is None:
            return []
        names = self.space.names
        return [names[i] for i in self.residual.free_vars() if names[i][0] != "t"]

    def sweep_names(self) -> list[str]:
        return [a.name for a in self.sweep]


def _poly_of(F) -> Poly:
    return F.poly if hasattr(F, "poly") else F


def build_chart(F, stratum: Stratum, box: float = BOX) -> FrontChart:
    P = _poly_of(F)
    sp = P.space
    pinned = {f"x{i}" for i in stratum.sigma}
    if any(int(name[1:]) > sp.r for name in pinned):
        raise ChartError(f"stratum {stratum} does not fit r={sp.r}")
    P = P.substitute({name: 0 for name in pinned})
    equations = [P.derive(f"x{i}") for i in range(1, sp.r + 1) if f"x{i}" not in pinned]
    equations += [P.derive(f"y{j}") for j in range(1, sp.k + 1)]

    candidates = [f"u{i}" for i in range(1, sp.n + 1)] + [f"y{j}" for j in range(1, sp.k + 1)]
    solved: dict[str, Poly] = {}
    residual: list[Poly] = []
    for eq in equations:
        eq = eq.substitute(solved) if solved else eq
        if eq.is_zero():
            continue
        pick = None
        for v in candidates:
            if v in solved:
                continue
            split = eq.linear_occurrence(v)
            if split is None or split.coefficient.is_zero():
                continue
            c = split.coefficient
            if c.degree == 0:
                pick = (v, -split.remainder.scale(Fraction(1) / c.constant_term()))
                break
        if pick is None:
            residual.append(eq)
            continue
        v, expr = pick
        solved = {w: e.substitute({v: expr}) for w, e in solved.items()}
        solved[v] = expr
        residual = [g.substitute({v: expr}) for g in residual]
    residual = [g for g in residual if not g.is_zero()]
    if len(residual) > 1:
        raise ChartError(f"{len(residual)} equations left after elimination on stratum {stratum}; "
                         "only one residual constraint is supported")

    sweep = []
    for name in sp.names:
        block = name[0]
        if block == "t" or name in pinned or name in solved:
            continue
        lo = 0.0 if block == "x" else -box
        sweep.append(SweepAxis(name, lo, box))
    z = P.substitute(solved) if solved else P
    return FrontChart(F, stratum, solved, sweep, z, residual[0] if residual else None,
                      equations, box)


# ------------------------------------------------------------------ samples
@dataclass(frozen=True)
class FrontSample:
    u: tuple
    z: float
    sweep: tuple
    stratum: Stratum


@dataclass
class FrontSheet:
    """Samples of one stratum at one time, with lattice connectivity.

    ``preimage`` holds (x, y, u) for every sample; ``grid_index`` is the
    sample's lattice position (crossing id first when a residual constraint
    is active); ``edges`` join lattice neighbours, ``edge_axis`` says which
    lattice direction each edge runs along.
    """

    stratum: Stratum
    t: tuple
    names: list             # names of the (x, y, u) coordinates in preimage
    sweep_names: list
    preimage: np.ndarray
    sweep: np.ndarray
    z: np.ndarray
    grid_index: np.ndarray
    edges: np.ndarray
    edge_axis: np.ndarray
    lattice_dims: int = 0

    @property
    def u(self) -> np.ndarray:
        cols = [i for i, n in enumerate(self.names) if n[0] == "u"]
        return self.preimage[:, cols]

    def column(self, name: str) -> np.ndarray:
        if name == "z":
            return self.z
        return self.preimage[:, self.names.index(name)]

    def __len__(self):
        return len(self.z)

    def __getitem__(self, i) -> FrontSample:
        return FrontSample(tuple(self.u[i]), float(self.z[i]), tuple(self.sweep[i]), self.stratum)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def points(self) -> np.ndarray:
        """(u, z) coordinates, one row per sample."""
        return np.column_stack([self.u, self.z]) if len(self) else np.zeros((0, self.u.shape[1] + 1))

    def to_dict(self, label: str = "") -> dict:
        return {
            "label": label,
            "t": [_num(v) for v in self.t],
            "stratum": list(self.stratum.sigma),
            "sweep_variables": list(self.sweep_names),
            "samples": [
                {"u": [_num(v) for v in self.u[i]], "z": _num(self.z[i]),
                 "sweep": [_num(v) for v in self.sweep[i]]}
                for i in range(len(self))
            ],
            "connectivity": self.edges.tolist(),
        }


def _num(v) -> float:
    return float(f"{float(v):.10g}")


def _empty_sheet(chart: FrontChart, t, names, sweep_names) -> FrontSheet:
    return FrontSheet(chart.stratum, tuple(t), names, sweep_names,
                      np.zeros((0, len(names))), np.zeros((0, len(sweep_names))), np.zeros(0),
                      np.zeros((0, 0), dtype=int), np.zeros((0, 2), dtype=int),
                      np.zeros(0, dtype=int))


def _odd(x: float) -> int:
    k = max(5, int(round(x)))
    return k if k % 2 else k + 1


def default_steps(dims: int, res: int = STEPS) -> int:
    """Steps per axis: ``res`` up to two axes, then a res^2 point budget."""
    if dims <= 2:
        return res
    return _odd(res ** (2.0 / dims))


def resolve_steps(chart: FrontChart, grid, fixed: dict) -> dict:
    """Steps for every non-fixed sweep axis.

    ``grid`` may be an int (same count on every axis), a dict name -> steps,
    or ``None`` for the default resolution.  By default the axes of a
    residual constraint (at most two) keep the full resolution and the
    remaining axes share the budget with the constraint curve.
    """
    names = [a.name for a in chart.sweep if a.name not in fixed]
    if isinstance(grid, dict):
        out = {n: int(grid.get(n, STEPS)) for n in names}
        if any(v < 1 for v in out.values()):
            raise ValueError("grid must be positive")
        return out
    if grid is not None and not isinstance(grid, (int, np.integer)):
        raise TypeError("grid must be an int, a dict or None")
    res = STEPS if grid is None else int(grid)
    if res < 1:
        raise ValueError("grid must be positive")
    if grid is not None and chart.residual is None:
        return {n: res for n in names}
    cvars = [n for n in chart.constraint_vars if n in names]
    free = [n for n in names if n not in cvars]
    if not cvars:
        steps = default_steps(len(free), res)
        return {n: steps for n in free}
    csteps = res if len(cvars) <= 2 else default_steps(len(cvars), res)
    fsteps = default_steps(len(free) + len(cvars) - 1, res) if free else res
    out = {n: csteps for n in cvars}
    out.update({n: fsteps for n in free})
    return out


def _evaluator(chart: FrontChart, t, fixed: dict):
    sp = chart.space
    tvals = dict(zip([n for n in sp.names if n[0] == "t"], t))
    pinned = {f"x{i}" for i in chart.stratum.sigma}

    def point(values: dict, count: int):
        pt = []
        for name in sp.names:
            if name in values:
                pt.append(values[name])
            elif name in tvals:
                pt.append(float(tvals[name]))
            elif name in fixed:
                pt.append(float(fixed[name]))
            elif name in pinned:
                pt.append(0.0)
            else:
                pt.append(np.zeros(count))
        return pt

    return point


def _bisect(g, point, a: np.ndarray, b: np.ndarray, cnames, iters=BISECT_ITERS):
    """Roots of g on segments [a, b] (rows); g(a) and g(b) have opposite signs."""
    count = len(a)
    lo = np.zeros(count)
    hi = np.ones(count)
    ga = g.eval(point(dict(zip(cnames, a.T)), count))
    neg_at_a = ga < 0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pm = a + mid[:, None] * (b - a)
        gm = g.eval(point(dict(zip(cnames, pm.T)), count))
        same = (gm < 0) == neg_at_a
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        if np.all(hi - lo < 1e-17):
            break
    s = 0.5 * (lo + hi)
    # snap to an exact lattice node root
    gb = g.eval(point(dict(zip(cnames, b.T)), count))
    s = np.where(ga == 0, 0.0, np.where(gb == 0, 1.0, s))
    return a + s[:, None] * (b - a)


def _crossings(chart: FrontChart, cnames, axes, point):
    """Crossing points of the residual on the constraint lattice.

    Returns (points (K, |C|), segments (S, 2) of crossing ids).
    """
    g = chart.residual
    vals = [axes[n] for n in cnames]
    mesh = np.meshgrid(*vals, indexing="ij")
    shape = mesh[0].shape
    flat = [m.ravel() for m in mesh]
    gv = g.eval(point(dict(zip(cnames, flat)), flat[0].size)).reshape(shape)
    pos = gv >= 0
    ends_a, ends_b, keys = [], [], []
    for ax in range(len(cnames)):
        sl_a = [slice(None)] * len(cnames)
        sl_b = [slice(None)] * len(cnames)
        sl_a[ax] = slice(0, -1)
        sl_b[ax] = slice(1, None)
        diff = pos[tuple(sl_a)] != pos[tuple(sl_b)]
        idx = np.argwhere(diff)
        for i in idx:
            ia = tuple(i)
            ib = list(i)
            ib[ax] += 1
            ib = tuple(ib)
            ends_a.append([vals[d][ia[d]] for d in range(len(cnames))])
            ends_b.append([vals[d][ib[d]] for d in range(len(cnames))])
            keys.append((ax,) + ia)
    if not keys:
        return np.zeros((0, len(cnames))), np.zeros((0, 2), dtype=int)
    pts = _bisect(g, point, np.array(ends_a), np.array(ends_b), cnames)
    segs = []
    if len(cnames) == 2:
        where = {k: i for i, k in enumerate(keys)}
        n0, n1 = shape
        for i in range(n0 - 1):
            for j in range(n1 - 1):
                cell = [where.get(k) for k in ((0, i, j), (1, i + 1, j), (0, i, j + 1), (1, i, j))]
                hit = [c for c in cell if c is not None]
                if len(hit) == 2:
                    segs.append(sorted(hit))
                elif len(hit) == 4:
                    centre = gv[i:i + 2, j:j + 2].mean() >= 0
                    if centre == pos[i, j]:
                        segs += [sorted((cell[0], cell[1])), sorted((cell[2], cell[3]))]
                    else:
                        segs += [sorted((cell[0], cell[3])), sorted((cell[1], cell[2]))]
    elif len(cnames) == 1:
        pass
    segs = np.array(sorted(segs), dtype=int).reshape(-1, 2)
    return pts, segs


def sample_front(chart: FrontChart, t, grid=None, fixed: dict | None = None,
                 clip: bool = True) -> FrontSheet:
    """Sweep the chart at time ``t``.

    ``fixed`` pins sweep variables to constants (a slice of the front);
    ``clip`` drops samples whose solved base variables leave the box.
    """
    fixed = dict(fixed or {})
    sp = chart.space
    t = tuple(float(v) for v in t)
    if len(t) != sp.m:
        raise ValueError(f"expected {sp.m} time values")
    names = [n for n in sp.names if n[0] != "t"]
    steps = resolve_steps(chart, grid, fixed)
    live = [a for a in chart.sweep if a.name not in fixed]
    sweep_names = [a.name for a in live]
    axes = {a.name: a.values(steps[a.name]) for a in live}
    point = _evaluator(chart, t, fixed)

    if chart.residual is None:
        cnames, cpts, segs = [], np.zeros((1, 0)), np.zeros((0, 2), dtype=int)
    else:
        cnames = [n for n in chart.constraint_vars if n in axes]
        if not cnames:
            val = float(chart.residual.eval(point({}, 1)))
            if abs(val) > EPS_RES:
                return _empty_sheet(chart, t, names, sweep_names)
            cpts, segs = np.zeros((1, 0)), np.zeros((0, 2), dtype=int)
        else:
            cpts, segs = _crossings(chart, cnames, axes, point)
            if len(cpts) == 0:
                return _empty_sheet(chart, t, names, sweep_names)

    pnames = [n for n in sweep_names if n not in cnames]
    pvals = [axes[n] for n in pnames]
    pshape = tuple(len(v) for v in pvals)
    pcount = int(np.prod(pshape)) if pshape else 1
    pidx = np.array(np.unravel_index(np.arange(pcount), pshape)).T if pshape else np.zeros((1, 0), int)
    K = len(cpts)
    # sample s = crossing c * pcount + p
    cid = np.repeat(np.arange(K), pcount)
    pid = np.tile(np.arange(pcount), K)
    values = {}
    for d, n in enumerate(cnames):
        values[n] = cpts[cid, d]
    for d, n in enumerate(pnames):
        values[n] = pvals[d][pidx[pid, d]]
    count = K * pcount
    for name, expr in chart.solved.items():
        values[name] = np.broadcast_to(np.asarray(expr.eval(point(values, count)), float), (count,)).copy()
    pt = point(values, count)
    z = np.broadcast_to(np.asarray(chart.z.eval(pt), float), (count,)).copy()
    pre = np.column_stack([np.broadcast_to(np.asarray(pt[sp.index(n)], float), (count,)) for n in names]) \
        if names else np.zeros((count, 0))
    sweep = np.column_stack([values[n] for n in sweep_names]) if sweep_names else np.zeros((count, 0))

    grid_index = np.column_stack([cid] * bool(cnames) + [pidx[pid, d] for d in range(len(pnames))]) \
        if (cnames or pnames) else np.zeros((count, 0), int)
    keep = np.ones(count, bool)
    if clip:
        for name in chart.solved:
            if name[0] == "u":
                v = values[name]
                keep &= (v >= -_clip_box(chart)) & (v <= _clip_box(chart))

    # connectivity
    edges, axis_of = [], []
    sid = np.arange(count).reshape((K,) + (pshape if pshape else ()))
    off = 1 if cnames else 0
    for d in range(len(pnames)):
        a = np.take(sid, range(0, pshape[d] - 1), axis=d + 1)
        b = np.take(sid, range(1, pshape[d]), axis=d + 1)
        e = np.column_stack([a.ravel(), b.ravel()])
        edges.append(e)
        axis_of.append(np.full(len(e), d + off))
    if len(segs):
        for p in range(pcount):
            edges.append(segs * pcount + p)
            axis_of.append(np.zeros(len(segs), int))
    edges = np.concatenate(edges) if edges else np.zeros((0, 2), int)
    axis_of = np.concatenate(axis_of) if axis_of else np.zeros(0, int)

    # drop clipped samples and renumber
    new_id = np.cumsum(keep) - 1
    ok = keep[edges[:, 0]] & keep[edges[:, 1]] if len(edges) else np.zeros(0, bool)
    edges = new_id[edges[ok]] if len(edges) else edges
    axis_of = axis_of[ok] if len(axis_of) else axis_of
    order = np.lexsort((edges[:, 1], edges[:, 0])) if len(edges) else np.zeros(0, int)
    return FrontSheet(chart.stratum, t, names, sweep_names, pre[keep], sweep[keep], z[keep],
                      grid_index[keep], edges[order].astype(int), axis_of[order].astype(int),
                      (1 if cnames and len(cnames) == 2 else 0) + len(pnames))


def _clip_box(chart: FrontChart) -> float:
    return chart.box


def full_front(F, t, grid=None, fixed: dict | None = None, box: float = BOX) -> dict:
    """Stratum -> FrontSheet for every face of the corner."""
    P = _poly_of(F)
    out = {}
    for s in strata(P.space.r):
        chart = build_chart(F, s, box)
        out[s] = sample_front(chart, t, grid, fixed)
    return out


# ------------------------------------------------------------------ checks
def residuals(F, sheet: FrontSheet) -> dict:
    """Largest |F - z|, |active derivative| and corner violation over a sheet."""
    P = _poly_of(F)
    sp = P.space
    if len(sheet) == 0:
        return {"F": 0.0, "derivative": 0.0, "corner": 0.0, "pinned": 0.0}
    pt = []
    for name in sp.names:
        if name[0] == "t":
            pt.append(sheet.t[int(name[1:]) - 1])
        else:
            pt.append(sheet.column(name))
    pinned = {f"x{i}" for i in sheet.stratum.sigma}
    fval = np.abs(np.asarray(P.eval(pt)) - sheet.z).max()
    ders = [f"x{i}" for i in range(1, sp.r + 1) if f"x{i}" not in pinned]
    ders += [f"y{j}" for j in range(1, sp.k + 1)]
    dval = max((np.abs(np.broadcast_to(P.derive(v).eval(pt), sheet.z.shape)).max() for v in ders),
               default=0.0)
    xs = [sheet.column(f"x{i}") for i in range(1, sp.r + 1) if f"x{i}" not in pinned]
    corner = max((float(-x.min()) for x in xs), default=0.0)
    pin = max((float(np.abs(sheet.column(x)).max()) for x in pinned), default=0.0)
    return {"F": float(fval), "derivative": float(dval), "corner": max(corner, 0.0), "pinned": pin}


def brute_force_front(F, stratum: Stratum, t, box: float = BOX, pitch: float = 0.02,
                      safety: float = 1.5) -> FrontSheet:
    """Dense lattice scan of the critical set, no elimination.

    Keeps lattice points where every critical equation g satisfies
    ``|g| <= safety * (h/2 sum|dg| + h^2/8 sum|d2g|)``, the Taylor bound for
    a zero inside the point's half-pitch cell, and where g takes both signs
    on the 3^d lattice neighbourhood of the point (so a zero really lies
    within one pitch).
    """
    P = _poly_of(F)
    sp = P.space
    pinned = {f"x{i}" for i in stratum.sigma}
    names = [n for n in sp.names if n[0] != "t"]
    scan = [n for n in names if n not in pinned]
    if len(scan) > 3:
        raise ValueError(f"brute force limited to 3 scanned variables, got {len(scan)}")
    Q = P.substitute({n: 0 for n in pinned})
    eqs = [Q.derive(n) for n in scan if n[0] in "xy"]
    axes = []
    for n in scan:
        lo = 0.0 if n[0] == "x" else -box
        count = int(round((box - lo) / pitch)) + 1
        v = lo + pitch * np.arange(count)
        v[np.abs(v) < 1e-12] = 0.0
        axes.append(v)
    mesh = np.meshgrid(*axes, indexing="ij") if axes else []
    flat = {n: m.ravel() for n, m in zip(scan, mesh)}
    count = mesh[0].size if mesh else 1
    tv = dict(zip([n for n in sp.names if n[0] == "t"], t))
    pt = [flat[n] if n in flat else (float(tv[n]) if n in tv else np.zeros(count)) for n in sp.names]
    keep = np.ones(count, bool)
    h = pitch
    shape = mesh[0].shape if mesh else ()
    for g in eqs:
        gv = np.broadcast_to(g.eval(pt), (count,))
        first = sum(np.abs(np.broadcast_to(g.derive(v).eval(pt), (count,))) for v in scan)
        second = sum(np.abs(np.broadcast_to(g.derive(v).derive(w).eval(pt), (count,)))
                     for v in scan for w in scan)
        keep &= np.abs(gv) <= safety * (0.5 * h * first + h * h / 8 * second) + 1e-15
        # the sign of g must change (or vanish) among the point's lattice neighbours
        grid_g = gv.reshape(shape)
        lo = minimum_filter(grid_g, size=3, mode="nearest").ravel()
        hi = maximum_filter(grid_g, size=3, mode="nearest").ravel()
        keep &= (lo <= 0) & (hi >= 0)
    pre = np.column_stack([np.broadcast_to(np.asarray(p, float), (count,)) for p, n in zip(pt, sp.names)
                           if n[0] != "t"])[keep]
    z = np.broadcast_to(np.asarray(Q.eval(pt), float), (count,))[keep]
    sweep = np.column_stack([flat[n] for n in scan])[keep] if scan else np.zeros((int(keep.sum()), 0))
    return FrontSheet(stratum, tuple(t), names, scan, pre, sweep, z,
                      np.zeros((len(z), 0), int), np.zeros((0, 2), int), np.zeros(0, int))


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two point sets (inf if exactly one is empty)."""
    from scipy.spatial import cKDTree

    if len(a) == 0 and len(b) == 0:
        return 0.0
    if len(a) == 0 or len(b) == 0:
        return float("inf")
    da, _ = cKDTree(b).query(a)
    db, _ = cKDTree(a).query(b)
    return float(max(da.max(), db.max()))


def sheet_json(sheets: dict, label: str = "") -> str:
    doc = {
        "label": label,
        "sheets": [sheets[s].to_dict(label) for s in sorted(sheets)],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _on_lattice(sheet: FrontSheet, pitch: float) -> np.ndarray:
    ok = np.ones(len(sheet), bool)
    for j, n in enumerate(sheet.names):
        if n[0] == "u":
            w = sheet.preimage[:, j] / pitch
            ok &= np.abs(w - np.round(w)) < 1e-6
    return ok


def _inside(sheet: FrontSheet, box: float, margin: float) -> np.ndarray:
    ok = np.ones(len(sheet), bool)
    for j, n in enumerate(sheet.names):
        v = sheet.preimage[:, j]
        ok &= (v <= box - margin + 1e-9) if n[0] == "x" else (np.abs(v) <= box - margin + 1e-9)
    return ok


def oracle_distance(elim: FrontSheet, brute: FrontSheet, pitch: float = 0.02,
                    box: float = BOX, margin: float = 0.1) -> float:
    """Hausdorff-type distance between an elimination sheet and the lattice oracle.

    Both fronts are compared over the oracle's base lattice (elimination
    samples whose u lie off it are dropped), and only points at least
    ``margin`` inside the artificial sweep box are required to have a
    partner; partners may lie anywhere.  The corner x = 0 is a genuine
    boundary and is not trimmed.
    """
    from scipy.spatial import cKDTree

    lat = _on_lattice(elim, pitch)
    a = elim.points()[lat]
    a_in = _inside(elim, box, margin)[lat]
    b = brute.points()
    b_in = _inside(brute, box, margin)
    if len(a) == 0 or len(b) == 0:
        return 0.0 if not a_in.any() and not b_in.any() else float("inf")
    d1 = cKDTree(b).query(a[a_in])[0].max() if a_in.any() else 0.0
    d2 = cKDTree(a).query(b[b_in])[0].max() if b_in.any() else 0.0
    return float(max(d1, d2))
