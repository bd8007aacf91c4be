"""Multi-time bifurcation atlases: one stratified front per node of a (t1, t2) grid."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .front import FrontSheet, Stratum, build_chart, sample_front, strata

DELTA = 0.5
FLAG_TOL = 1e-4


@dataclass(frozen=True)
class TimeGrid:
    """Values per time axis; nodes run lexicographically (t1 major)."""

    axes: tuple = ((-DELTA, 0.0, DELTA), (-DELTA, 0.0, DELTA))

    def __post_init__(self):
        axes = tuple(tuple(float(v) for v in ax) for ax in self.axes)
        if not axes or any(len(ax) == 0 for ax in axes):
            raise ValueError("every time axis needs at least one value")
        if not all(0.0 in ax for ax in axes):
            raise ValueError("the grid must contain t = 0")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def symmetric(cls, delta: float = DELTA, m: int = 2, count: int = 3) -> "TimeGrid":
        if count == 1:
            vals = (0.0,)
        else:
            vals = tuple(float(v) for v in np.linspace(-delta, delta, count))
            vals = tuple(0.0 if abs(v) < 1e-15 else v for v in vals)
        return cls((vals,) * m)

    @property
    def m(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(len(ax) for ax in self.axes)

    def nodes(self) -> list[tuple]:
        out = [()]
        for ax in self.axes:
            out = [p + (v,) for p in out for v in ax]
        return out

    def to_dict(self) -> dict:
        return {"axes": [list(ax) for ax in self.axes]}


@dataclass
class Panel:
    t: tuple
    sheets: dict                       # Stratum -> FrontSheet
    flags: dict = field(default_factory=dict)   # Stratum -> bool array

    def nonempty(self) -> list[Stratum]:
        return [s for s in sorted(self.sheets) if len(self.sheets[s])]


@dataclass
class BifurcationAtlas:
    family: object
    grid: TimeGrid
    panels: list
    res: int | None = None
    fixed: dict = field(default_factory=dict)
    flag_tol: float | None = None

    @property
    def label(self) -> str:
        return self.family.name

    def display_names(self) -> list[str]:
        """Coordinates shown in figures: unsliced base variables, then z."""
        names = [n for n in self.family.space.names if n[0] == "u" and n not in self.fixed]
        return names + ["z"]

    @property
    def dimension(self) -> int:
        return len(self.display_names())

    def panel(self, t) -> Panel:
        t = tuple(float(v) for v in t)
        for p in self.panels:
            if p.t == t:
                return p
        raise KeyError(t)


def display_slice(F, limit: int = 3) -> dict:
    """Base variables pinned to 0 so that at most ``limit`` coordinates remain.

    The constant slot goes first (it only shifts z), then Morse tail
    variables from the last one down, then the remaining base variables.
    """
    names = [n for n in F.space.names if n[0] == "u"]
    order = []
    c = F.constant_slot() if hasattr(F, "constant_slot") else None
    if c:
        order.append(c)
    tails = F.tail_variables() if hasattr(F, "tail_variables") else []
    order += [v for v in reversed(tails) if v not in order]
    order += [v for v in reversed(names) if v not in order]
    fixed = {}
    while len(names) - len(fixed) + 1 > limit and order:
        fixed[order.pop(0)] = 0.0
    return fixed


def atlas(F, grid: TimeGrid | None = None, res=None, fixed: dict | None = None,
          workers: int | None = None, flag_tol: float | None = FLAG_TOL) -> BifurcationAtlas:
    """Fronts for every node of ``grid``; ``fixed=None`` picks :func:`display_slice`."""
    grid = grid or TimeGrid()
    if F.space.m != grid.m:
        raise ValueError(f"family has m={F.space.m}, grid has {grid.m} axes")
    fixed = display_slice(F) if fixed is None else dict(fixed)
    charts = {s: build_chart(F, s) for s in strata(F.space.r)}
    nodes = grid.nodes()

    def one(t):
        return Panel(tuple(t), {s: sample_front(ch, t, res, fixed) for s, ch in charts.items()})

    workers = workers or os.cpu_count() or 1
    if workers > 1 and len(nodes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            panels = list(pool.map(one, nodes))
    else:
        panels = [one(t) for t in nodes]
    out = BifurcationAtlas(F, grid, panels, res, fixed)
    if flag_tol is not None:
        flag_singular(out, flag_tol)
    return out


# ------------------------------------------------------------ singular flags
def sheet_dimension(chart, sheet: FrontSheet) -> int:
    live = len(sheet.sweep_names)
    if chart.residual is not None and any(n in sheet.sweep_names for n in chart.constraint_vars):
        live -= 1
    return live


def jacobian(chart, sheet: FrontSheet) -> np.ndarray:
    """d(u, z)/d(sweep) at every sample, projected on the constraint tangent space."""
    sp = chart.space
    live = sheet.sweep_names
    N, d = len(sheet), len(live)
    pt = [sheet.column(n) if n[0] != "t" else sheet.t[int(n[1:]) - 1] for n in sp.names]
    rows = []
    for n in [v for v in sp.names if v[0] == "u"] + ["z"]:
        row = np.zeros((N, d))
        if n in live:
            row[:, live.index(n)] = 1.0
        elif n == "z" or n in chart.solved:
            expr = chart.z if n == "z" else chart.solved[n]
            for j, v in enumerate(live):
                row[:, j] = np.broadcast_to(expr.derive(v).eval(pt), (N,))
        rows.append(row)
    J = np.stack(rows, axis=1)                      # (N, n+1, d)
    if chart.residual is not None and any(v in live for v in chart.constraint_vars):
        grad = np.stack([np.broadcast_to(chart.residual.derive(v).eval(pt), (N,)) for v in live], axis=1)
        norm = np.linalg.norm(grad, axis=1, keepdims=True)
        nvec = np.divide(grad, norm, out=np.zeros_like(grad), where=norm > 0)
        proj = np.eye(d)[None] - nvec[:, :, None] * nvec[:, None, :]
        J = J @ proj
        J[norm[:, 0] == 0] = 0.0
    return J


def singular_mask(chart, sheet: FrontSheet, tol: float = FLAG_TOL) -> np.ndarray:
    dim = sheet_dimension(chart, sheet)
    if len(sheet) == 0 or dim <= 0:
        return np.zeros(len(sheet), bool)
    s = np.linalg.svd(jacobian(chart, sheet), compute_uv=False)
    top = s[:, 0]
    low = s[:, dim - 1]
    return (top == 0) | (low < tol * top)


def flag_singular(at: BifurcationAtlas, tol: float = FLAG_TOL) -> BifurcationAtlas:
    """Mark samples where the sheet parametrisation drops rank (cusp edges, folds)."""
    charts = {s: build_chart(at.family, s) for s in strata(at.family.space.r)}
    for p in at.panels:
        p.flags = {s: singular_mask(charts[s], sh, tol) for s, sh in p.sheets.items()}
    at.flag_tol = tol
    return at


# ------------------------------------------------------------ JSON bundle
def panel_name(at: BifurcationAtlas, index: int) -> str:
    shape = at.grid.shape
    idx = np.unravel_index(index, shape)
    return "panel_" + "_".join(str(int(i)) for i in idx)


def panel_document(at: BifurcationAtlas, index: int) -> dict:
    p = at.panels[index]
    sheets = []
    for s in sorted(p.sheets):
        doc = p.sheets[s].to_dict(str(at.family.label) if at.family.label else "")
        mask = p.flags.get(s)
        doc["flagged"] = [int(i) for i in np.flatnonzero(mask)] if mask is not None else []
        sheets.append(doc)
    return {
        "label": str(at.family.label) if at.family.label else "",
        "t": [float(v) for v in p.t],
        "fixed": {k: float(v) for k, v in sorted(at.fixed.items())},
        "sheets": sheets,
    }


def write_bundle(at: BifurcationAtlas, outdir, extra: dict | None = None) -> list[Path]:
    """One point-cloud document per panel plus ``atlas.json`` listing them."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files, entries = [], []
    for i, p in enumerate(at.panels):
        name = panel_name(at, i) + ".json"
        path = outdir / name
        path.write_text(json.dumps(panel_document(at, i), sort_keys=True, separators=(",", ":")))
        files.append(path)
        entries.append({
            "file": name,
            "t": [float(v) for v in p.t],
            "samples": {str(s): len(p.sheets[s]) for s in sorted(p.sheets)},
            "flagged": {str(s): int(p.flags[s].sum()) for s in sorted(p.flags)},
        })
    doc = {
        "label": str(at.family.label) if at.family.label else "",
        "family": at.family.to_dict(),
        "grid": at.grid.to_dict(),
        "res": at.res,
        "fixed": {k: float(v) for k, v in sorted(at.fixed.items())},
        "display": at.display_names(),
        "flag_tol": at.flag_tol,
        "panels": entries,
    }
    if extra:
        doc.update(extra)
    path = outdir / "atlas.json"
    path.write_text(json.dumps(doc, sort_keys=True, indent=1))
    files.append(path)
    return files
