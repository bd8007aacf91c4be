"""Command line: ``retfront list | check | atlas``.

Exit codes: 0 success (verdict true), 1 verdict false, 2 usage error,
3 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .catalog import CatalogError, all_entries, instantiate
from .jetalgebra import (
    determinacy_degree,
    germ_at_origin,
    is_PR_versal,
    is_tPK_infinitesimally_stable,
)
from .polyring import Poly

OK, FALSE, USAGE, INTERNAL = 0, 1, 2, 3
FORMATS = ("svg", "json", "obj")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = ""
    label: str | None = None
    l: int | None = None
    signs: str = ""
    delta: float = 0.5
    res: int = 81
    order: int | None = None
    out: str = "out"
    workers: int = 0
    exact: bool = True
    format: str = ",".join(FORMATS)
    pattern: bool = False
    formula: str | None = None
    r: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def formats(self) -> list[str]:
        out = [f.strip() for f in self.format.split(",") if f.strip()]
        bad = [f for f in out if f not in FORMATS + ("text",)]
        if bad:
            raise UsageError(f"unknown format(s): {', '.join(bad)}")
        return out


_KEYS = {f.name: f for f in fields(RunConfig)}


def _coerce(key: str, value):
    if value is None:
        return None
    default = getattr(RunConfig, key, None)
    kind = _KEYS[key].type
    if isinstance(value, str) and ("bool" in kind):
        return value.strip().lower() in ("1", "true", "yes", "on")
    if "int" in kind and not isinstance(value, bool):
        return int(value)
    if "float" in kind:
        return float(value)
    if isinstance(default, bool):
        return bool(value)
    return value


def load_config(path: str) -> dict:
    """Flat key-value file: JSON object or ``key = value`` lines.

    A manifest written by ``atlas`` is accepted too (its ``config`` entry
    is used).
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
        if isinstance(data, dict) and isinstance(data.get("config"), dict):
            data = data["config"]
    except json.JSONDecodeError:
        data = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"bad config line: {line!r}")
            k, v = line.split("=", 1)
            data[k.strip().replace("-", "_")] = v.strip()
    unknown = sorted(set(data) - set(_KEYS))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return {k: _coerce(k, v) for k, v in data.items() if k != "command"}


def parse_signs(text) -> tuple[int, ...]:
    if text is None or text == "":
        return ()
    if isinstance(text, (list, tuple)):
        return tuple(int(s) for s in text)
    out = []
    for tok in text.replace(",", " ").split():
        if set(tok) <= {"+", "-"} and len(tok) > 1:
            out += [1 if c == "+" else -1 for c in tok]
        elif tok in ("+", "+1", "1"):
            out.append(1)
        elif tok in ("-", "-1"):
            out.append(-1)
        else:
            raise UsageError(f"bad sign {tok!r}; use + and -")
    return tuple(out)


# ------------------------------------------------------------------ parser
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="retfront", description="Reticular wavefront normal forms.")
    sub = p.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(sp):
        sp.add_argument("--config", default=S, help="flat key-value config file; flags win")
        sp.add_argument("--label", default=S, help="catalog label, e.g. 2A2 or 2C3-")
        sp.add_argument("--l", type=int, default=S, help="number of base variables")
        sp.add_argument("--signs", default=S, help="Morse tail signs, e.g. '+,-'")
        sp.add_argument("--pattern", action="store_true", default=S,
                        help="use the pattern-consistent variant of flagged entries")
        sp.add_argument("--workers", type=int, default=S, help="worker threads (0: all cores)")
        sp.add_argument("--format", default=S, help="output formats")

    lp = sub.add_parser("list", help="print the classification table")
    lp.add_argument("--r", type=int, default=S, help="corner rank filter")
    lp.add_argument("--format", default=S, help="text or json")
    lp.add_argument("--config", default=S)

    cp = sub.add_parser("check", help="determinacy, stability and versality of one instance")
    common(cp)
    cp.add_argument("--order", type=int, default=S, help="literal jet order (default: certificate)")
    cp.add_argument("--formula", default=S, help="override the family polynomial")
    g = cp.add_mutually_exclusive_group()
    g.add_argument("--exact", dest="exact", action="store_true", default=S,
                   help="exact rational ranks (default)")
    g.add_argument("--float", dest="exact", action="store_false", default=S,
                   help="cross-check ranks in floating point")

    ap = sub.add_parser("atlas", help="3x3 bifurcation atlas: figure, bundle, meshes")
    common(ap)
    ap.add_argument("--delta", type=float, default=S, help="time grid half-width")
    ap.add_argument("--res", type=int, default=S, help="sweep steps per axis")
    ap.add_argument("--out", default=S, help="output directory")
    return p


def resolve(argv=None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    values = {}
    if "config" in ns:
        values.update(load_config(ns.pop("config")))
    values.update(ns)
    cfg = RunConfig(**{k: v for k, v in values.items() if k in _KEYS})
    if cfg.command == "list" and "format" not in values:
        cfg.format = "text"
    if cfg.command == "check" and "format" not in values:
        cfg.format = "json"
    if cfg.workers <= 0:
        cfg.workers = os.cpu_count() or 1
    return cfg


# ------------------------------------------------------------------ commands
def _family(cfg: RunConfig):
    if not cfg.label:
        raise UsageError("--label is required")
    try:
        fam = instantiate(cfg.label, cfg.l, parse_signs(cfg.signs), cfg.pattern)
    except CatalogError as exc:
        raise UsageError(str(exc)) from exc
    cfg.l = fam.space.n
    cfg.signs = ",".join("+" if s > 0 else "-" for s in fam.tail_signs)
    if cfg.formula:
        fam = with_formula(fam, cfg.formula)
    return fam


def with_formula(fam, text: str):
    """Family with its polynomial replaced; ``a`` is re-read as the coefficient of phi0."""
    try:
        poly = Poly.from_text(fam.space, text)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"cannot parse formula: {exc}") from exc
    a = None
    if fam.phi0 is not None:
        sp = fam.space
        xy = sp.block_indices("x", "y")
        (target,) = fam.phi0.terms
        picked = {}
        for e, c in poly.terms.items():
            if all(e[i] == target[i] for i in xy):
                picked[tuple(0 if i in xy else v for i, v in enumerate(e))] = c
        a = Poly(sp, picked)
    try:
        return fam.replace(poly, a)
    except CatalogError as exc:
        raise UsageError(str(exc)) from exc


def cmd_list(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    fmts = cfg.formats()
    rows = [e for e in all_entries() if cfg.r is None or e.r == cfg.r]
    if "json" in fmts:
        out.write(json.dumps([e.to_dict() for e in rows], indent=1, sort_keys=True,
                             ensure_ascii=False) + "\n")
        return OK
    if not rows:
        out.write(f"no catalog entries for r={cfg.r}\n")
    out.write(f"{'label':<8} {'r':>1}  {'l':<10} template\n")
    for e in rows:
        ls = ",".join(map(str, e.admissible()))
        name = e.key + ("±" if e.signed else "")
        for i, t in enumerate(e.template_latex()):
            if i == 0:
                out.write(f"{name:<8} {e.r:>1}  {ls:<10} {t}\n")
            else:
                out.write(f"{'':<8} {'':>1}  {'':<10} {t}\n")
    return OK


def check_report(fam, order=None, exact=True) -> dict:
    f0 = germ_at_origin(fam)
    det = determinacy_degree(f0)
    stab = is_tPK_infinitesimally_stable(fam, order, exact)
    vers = is_PR_versal(fam.a) if fam.a is not None else None
    verdict = bool(stab.verdict and det is not None and (vers is None or vers.verdict))
    return {
        "label": str(fam.label) if fam.label else None,
        "family": fam.to_dict(),
        "determinacy": {"germ": f0.to_text(), "degree": det},
        "stability": stab.to_dict(),
        "versality": vers.to_dict() if vers is not None else None,
        "verdict": verdict,
    }


def cmd_check(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    fam = _family(cfg)
    if cfg.order is not None and cfg.order < 1:
        raise UsageError("--order must be >= 1")
    rep = check_report(fam, cfg.order, cfg.exact)
    out.write(json.dumps(rep, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    return OK if rep["verdict"] else FALSE


def _sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_atlas(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    from .bifurcate import TimeGrid, atlas, panel_name, write_bundle
    from .render import atlas_grid, export_mesh, gallery_index

    fam = _family(cfg)
    if fam.space.m != 2:
        raise UsageError("atlas needs m = 2")
    if cfg.res < 2:
        raise UsageError("--res must be >= 2")
    fmts = cfg.formats()
    grid = TimeGrid.symmetric(cfg.delta) if cfg.delta else TimeGrid(((0.0,) * 3, (0.0,) * 3))
    at = atlas(fam, grid, cfg.res, workers=cfg.workers)
    root = Path(cfg.out)
    outdir = root / atlas_dirname(fam)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        written: list[Path] = []
        if "svg" in fmts:
            p = outdir / "atlas.svg"
            p.write_text(atlas_grid(at), encoding="utf-8")
            written.append(p)
        if "json" in fmts:
            written += write_bundle(at, outdir / "bundle")
        if "obj" in fmts and at.dimension == 3:
            (outdir / "meshes").mkdir(exist_ok=True)
            for i in range(len(at.panels)):
                p = outdir / "meshes" / f"{panel_name(at, i)}.obj"
                p.write_text(export_mesh(at, i))
                written.append(p)
        rel = [str(p.relative_to(outdir)) for p in written]
        manifest = {
            "label": str(fam.label),
            "caption": fam.label.pretty(),
            "config": cfg.to_dict(),
            "panels": len(at.panels),
            "layout": list(at.grid.shape),
            "display": at.display_names(),
            "fixed": {k: float(v) for k, v in sorted(at.fixed.items())},
            "files": {r: _sha(p) for r, p in zip(rel, written)},
        }
        (outdir / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True,
                                                         ensure_ascii=False) + "\n")
        (outdir / "index.html").write_text(
            gallery_index([{"label": fam.label.pretty(), "files": rel + ["manifest.json"]}],
                          title=fam.label.pretty()), encoding="utf-8")
        _refresh_gallery(root)
    except OSError as exc:
        raise UsageError(f"cannot write to {exc.filename}: {exc.strerror}") from exc
    out.write(f"wrote {len(written) + 2} files to {outdir}\n")
    return OK


def atlas_dirname(fam) -> str:
    """Label, plus l and tail signs for a Morse tail and a suffix for the pattern variant."""
    name = str(fam.label)
    if fam.tail_signs:
        name += f"_l{fam.space.n}" + "".join("p" if s > 0 else "m" for s in fam.tail_signs)
    if fam.pattern:
        name += "_pattern"
    return name


def _refresh_gallery(root: Path) -> None:
    from .render import gallery_index

    entries = []
    for m in sorted(root.glob("*/manifest.json")):
        doc = json.loads(m.read_text())
        sub = m.parent.name
        entries.append({"label": doc.get("caption", sub),
                        "files": [f"{sub}/{f}" for f in sorted(doc["files"])] + [f"{sub}/manifest.json"]})
    (root / "index.html").write_text(gallery_index(entries), encoding="utf-8")


COMMANDS = {"list": cmd_list, "check": cmd_check, "atlas": cmd_atlas}


def main(argv=None) -> int:
    try:
        cfg = resolve(argv)
    except SystemExit as exc:          # argparse usage errors and --help
        return int(exc.code or 0) and USAGE
    except UsageError as exc:
        print(f"retfront: {exc}", file=sys.stderr)
        return USAGE
    try:
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"retfront: {exc}", file=sys.stderr)
        return USAGE
    except Exception as exc:           # noqa: BLE001
        print(f"retfront: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INTERNAL


if __name__ == "__main__":
    sys.exit(main())
