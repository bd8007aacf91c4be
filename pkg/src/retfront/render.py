"""Deterministic SVG figures and OBJ meshes for fronts and atlases.

Everything here is a pure function of its input: coordinates are written
with fixed precision and elements are emitted in a canonical order, so the
same atlas always produces the same bytes.
"""

from __future__ import annotations

import html
import math
from dataclasses import dataclass, field

import numpy as np

from .bifurcate import BifurcationAtlas, Panel, panel_name

COLORS = ("#1f4e79", "#b03a2e", "#1e8449", "#7d3c98")
FLAG_COLOR = "#d35400"
PANEL = 240
INSET = 72
MAX_LINES = 24


@dataclass
class Layer:
    name: str
    points: np.ndarray          # normalised display coordinates, shape (N, dim)
    edges: np.ndarray           # (E, 2) sample ids
    edge_axis: np.ndarray
    flagged: np.ndarray         # sample ids
    color: str = COLORS[0]


@dataclass
class Scene:
    dimension: int
    layers: list
    bounds: np.ndarray          # (dim, 2) data bounds used for normalisation
    azimuth: float = 30.0
    elevation: float = 20.0
    title: str = ""
    axes: list = field(default_factory=list)

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError("scene dimension must be 2 or 3")


# ------------------------------------------------------------------ scenes
def _coords(at: BifurcationAtlas, sheet) -> np.ndarray:
    return np.column_stack([sheet.column(n) for n in at.display_names()]) if len(sheet) \
        else np.zeros((0, at.dimension))


def atlas_bounds(at: BifurcationAtlas) -> np.ndarray:
    """Shared bounds over every panel, so all panels use one scale."""
    dim = at.dimension
    lo = np.full(dim, np.inf)
    hi = np.full(dim, -np.inf)
    for p in at.panels:
        for sh in p.sheets.values():
            if len(sh):
                c = _coords(at, sh)
                lo = np.minimum(lo, c.min(axis=0))
                hi = np.maximum(hi, c.max(axis=0))
    empty = ~np.isfinite(lo)
    lo[empty], hi[empty] = -1.0, 1.0
    flat = hi - lo < 1e-12
    lo[flat] -= 1.0
    hi[flat] += 1.0
    return np.column_stack([lo, hi])


def _normalise(c: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    mid = bounds.mean(axis=1)
    half = 0.5 * (bounds[:, 1] - bounds[:, 0])
    return (c - mid) / half


def _decimate(sheet, dim: int) -> np.ndarray:
    """Edge mask keeping about MAX_LINES lattice lines per direction (3D only)."""
    if dim == 2 or len(sheet.edges) == 0:
        return np.ones(len(sheet.edges), bool)
    gi = sheet.grid_index
    counts = gi.max(axis=0) + 1
    stride = np.maximum(1, np.ceil(counts / MAX_LINES).astype(int))
    keep = np.ones(len(sheet.edges), bool)
    first = gi[sheet.edges[:, 0]]
    for col in range(gi.shape[1]):
        off = sheet.edge_axis != col
        keep &= ~off | (first[:, col] % stride[col] == 0)
    return keep


def panel_scene(at: BifurcationAtlas, panel: Panel, bounds: np.ndarray | None = None) -> Scene:
    bounds = atlas_bounds(at) if bounds is None else bounds
    layers = []
    for i, s in enumerate(sorted(panel.sheets)):
        sh = panel.sheets[s]
        if len(sh) == 0:
            continue
        keep = _decimate(sh, at.dimension)
        flags = panel.flags.get(s)
        layers.append(Layer(
            name=s.key,
            points=_normalise(_coords(at, sh), bounds),
            edges=sh.edges[keep],
            edge_axis=sh.edge_axis[keep],
            flagged=np.flatnonzero(flags) if flags is not None else np.zeros(0, int),
            color=COLORS[i % len(COLORS)],
        ))
    title = "t=(" + ", ".join(f"{v:g}" for v in panel.t) + ")"
    return Scene(at.dimension, layers, bounds, title=title, axes=at.display_names())


# ------------------------------------------------------------------ geometry
def project(points: np.ndarray, azimuth: float, elevation: float) -> np.ndarray:
    """Orthographic view; returns screen (x, y) with y up."""
    a, e = math.radians(azimuth), math.radians(elevation)
    X, Y, Z = points[:, 0], points[:, 1], points[:, 2]
    px = math.cos(a) * X - math.sin(a) * Y
    py = math.sin(e) * (math.sin(a) * X + math.cos(a) * Y) + math.cos(e) * Z
    return np.column_stack([px, py])


def _chains(edges: np.ndarray) -> list[list[int]]:
    """Split an undirected edge list into polylines, deterministically."""
    adj: dict[int, list[int]] = {}
    for a, b in edges.tolist():
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    for v in adj:
        adj[v].sort()
    used = set()
    out = []

    def walk(start):
        path = [start]
        cur = start
        while True:
            nxt = None
            for w in adj[cur]:
                key = (min(cur, w), max(cur, w))
                if key not in used:
                    used.add(key)
                    nxt = w
                    break
            if nxt is None:
                return path
            path.append(nxt)
            cur = nxt

    nodes = sorted(adj)
    for v in nodes:
        if len(adj[v]) % 2 == 1:
            while any((min(v, w), max(v, w)) not in used for w in adj[v]):
                out.append(walk(v))
    for v in nodes:
        while any((min(v, w), max(v, w)) not in used for w in adj[v]):
            out.append(walk(v))
    return out


def _path(xy: np.ndarray, edges: np.ndarray, axis: np.ndarray) -> str:
    parts = []
    for ax in sorted(set(axis.tolist())):
        for chain in _chains(edges[axis == ax]):
            pts = xy[chain]
            parts.append("M" + " L".join(f"{x:.2f} {y:.2f}" for x, y in pts))
    return " ".join(parts)


def _to_screen(p2: np.ndarray, x0: float, y0: float, size: float, pad: float = 10.0) -> np.ndarray:
    half = 0.5 * size - pad
    return np.column_stack([x0 + 0.5 * size + half * p2[:, 0], y0 + 0.5 * size - half * p2[:, 1]])


def _view(scene: Scene, layer: Layer, top: bool = False) -> np.ndarray:
    if scene.dimension == 2:
        return layer.points[:, :2]
    if top:
        return layer.points[:, :2]
    # the rotated unit cube spans at most sqrt(2) (x) and sin(e)*sqrt(2)+cos(e) (y)
    e = math.radians(scene.elevation)
    scale = max(math.sqrt(2.0), math.sin(e) * math.sqrt(2.0) + math.cos(e))
    return project(layer.points, scene.azimuth, scene.elevation) / scale


# ------------------------------------------------------------------ SVG
def _panel_body(scene: Scene, x0: float, y0: float, size: float) -> list[str]:
    out = [f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{size:.2f}" height="{size:.2f}" '
           'fill="white" stroke="#999" stroke-width="0.5"/>']
    width = 1.0 if scene.dimension == 2 else 0.4
    for layer in scene.layers:
        xy = _to_screen(_view(scene, layer), x0, y0, size)
        d = _path(xy, layer.edges, layer.edge_axis)
        if d:
            out.append(f'<path class="{layer.name}" d="{d}" fill="none" stroke="{layer.color}" '
                       f'stroke-width="{width}"/>')
        elif len(xy):
            out.append(f'<g class="{layer.name}" fill="{layer.color}">' +
                       "".join(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="0.6"/>' for x, y in xy) + "</g>")
    if scene.dimension == 3:
        ix, iy = x0 + size - INSET * size / PANEL - 2, y0 + 2
        isz = INSET * size / PANEL
        out.append(f'<rect x="{ix:.2f}" y="{iy:.2f}" width="{isz:.2f}" height="{isz:.2f}" '
                   'fill="#f7f7f7" stroke="#bbb" stroke-width="0.4"/>')
        for layer in scene.layers:
            xy = _to_screen(_view(scene, layer, top=True), ix, iy, isz, pad=3)
            d = _path(xy, layer.edges, layer.edge_axis)
            if d:
                out.append(f'<path class="{layer.name} top" d="{d}" fill="none" '
                           f'stroke="{layer.color}" stroke-width="0.25"/>')
    for layer in scene.layers:
        if len(layer.flagged):
            xy = _to_screen(_view(scene, layer), x0, y0, size)[layer.flagged]
            out.append(f'<g class="flagged {layer.name}" fill="{FLAG_COLOR}">' +
                       "".join(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.2"/>' for x, y in xy) + "</g>")
    if scene.title:
        out.append(f'<text x="{x0 + 4:.2f}" y="{y0 + size - 5:.2f}" font-size="9" '
                   f'font-family="sans-serif">{html.escape(scene.title)}</text>')
    return out


def _document(width: float, height: float, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
            f'viewBox="0 0 {width:.0f} {height:.0f}">')
    return "\n".join([head] + body + ["</svg>", ""])


def panel_svg(scene: Scene, size: float = PANEL) -> str:
    """One panel; an empty scene gives a valid empty frame."""
    return _document(size, size, _panel_body(scene, 0.0, 0.0, size))


def atlas_grid(at: BifurcationAtlas, layout: tuple | None = None, size: float = PANEL) -> str:
    """Panels row-major in node order (t1 major) with the catalog label as caption."""
    count = len(at.panels)
    if layout is None:
        shape = at.grid.shape
        layout = (shape[0], int(np.prod(shape[1:]))) if len(shape) > 1 else (1, shape[0])
    rows, cols = layout
    if rows * cols < count:
        raise ValueError(f"layout {rows}x{cols} cannot hold {count} panels")
    bounds = atlas_bounds(at)
    gap, top = 6.0, 34.0
    width = cols * size + (cols + 1) * gap
    height = top + rows * size + (rows + 1) * gap
    caption = at.family.label.pretty() if at.family.label else "F"
    axes = "(" + ", ".join(at.display_names()) + ")"
    if at.fixed:
        axes += " at " + ", ".join(f"{k}={v:g}" for k, v in sorted(at.fixed.items()))
    body = [f'<title>{html.escape(caption)}</title>',
            f'<text class="caption" x="{width / 2:.2f}" y="22" font-size="18" text-anchor="middle" '
            f'font-family="serif">{html.escape(caption)}</text>',
            f'<text x="{width - gap:.2f}" y="22" font-size="9" text-anchor="end" '
            f'font-family="sans-serif">{html.escape(axes)}</text>']
    for i, p in enumerate(at.panels):
        r, c = divmod(i, cols)
        x0 = gap + c * (size + gap)
        y0 = top + gap + r * (size + gap)
        body.append(f'<g class="panel" id="{panel_name(at, i)}">')
        body += _panel_body(panel_scene(at, p, bounds), x0, y0, size)
        body.append("</g>")
    return _document(width, height, body)


# ------------------------------------------------------------------ meshes
def _quads(sheet) -> tuple[list, list]:
    axes = sorted(set(sheet.edge_axis.tolist()))
    if len(axes) < 2:
        return [], sheet.edges.tolist()
    if len(axes) > 2:
        raise ValueError("mesh export needs a sheet with at most two lattice directions")
    a, b = axes
    ea = sheet.edges[sheet.edge_axis == a]
    fwd = {int(s): int(t) for s, t in sheet.edges[sheet.edge_axis == b]}
    have = {(int(s), int(t)) for s, t in ea} | {(int(t), int(s)) for s, t in ea}
    quads = []
    for s, t in ea.tolist():
        s2, t2 = fwd.get(s), fwd.get(t)
        if s2 is not None and t2 is not None and (s2, t2) in have:
            quads.append((s, t, t2, s2))
    return quads, []


def export_mesh(at: BifurcationAtlas, index: int) -> str:
    """Wavefront OBJ for one 3D panel: one object per stratum, flagged vertices as points."""
    if at.dimension != 3:
        raise ValueError("mesh export needs a 3D panel")
    p = at.panels[index]
    lines = [f"# {at.family.label if at.family.label else 'F'} t=" +
             ",".join(f"{v:g}" for v in p.t),
             "# coordinates " + " ".join(at.display_names())]
    base = 1
    for s in sorted(p.sheets):
        sh = p.sheets[s]
        if len(sh) == 0:
            continue
        lines.append(f"o {s.key}")
        for x, y, z in _coords(at, sh):
            lines.append(f"v {x:.6f} {y:.6f} {z:.6f}")
        quads, polyline = _quads(sh)
        for q in quads:
            lines.append("f " + " ".join(str(base + v) for v in q))
        for a, b in polyline:
            lines.append(f"l {base + a} {base + b}")
        flags = p.flags.get(s)
        if flags is not None and flags.any():
            lines.append(f"g {s.key}_flagged")
            lines += [f"p {base + int(i)}" for i in np.flatnonzero(flags)]
        base += len(sh)
    return "\n".join(lines) + "\n"


def gallery_index(entries: list[dict], title: str = "Front atlases") -> str:
    """HTML page linking every figure, bundle and mesh; ``entries`` are {label, files}."""
    out = ["<!DOCTYPE html>", "<html><head><meta charset=\"utf-8\">",
           f"<title>{html.escape(title)}</title></head><body>", f"<h1>{html.escape(title)}</h1>"]
    for e in entries:
        out.append(f"<h2>{html.escape(e['label'])}</h2><ul>")
        for f in e["files"]:
            out.append(f'<li><a href="{html.escape(f)}">{html.escape(f)}</a></li>')
        svgs = [f for f in e["files"] if f.endswith(".svg")]
        for f in svgs:
            out.append(f'</ul><img src="{html.escape(f)}" alt="{html.escape(e["label"])}"><ul>')
        out.append("</ul>")
    out.append("</body></html>")
    return "\n".join(out) + "\n"
