"""Normal forms of generic two-time bifurcations on 0- and 1-corners.

Every entry has the shape

    F = f(x, y) + a(u_j, ..., u_l, t) * phi0(x, y) + u_1 phi_1 + ... + u_{j-1} phi_{j-1}
    a = t1 + t2 u_j + u_j^3 (+/- u_{j+1}^2 +/- ... +/- u_l^2)

and is stored as structured data (f, phi0, the phi_i, the tail rule) from
which both the LaTeX template and concrete :class:`GeneratingFamily`
instances are produced.

A few printed forms cannot be stable as printed (the a-direction lands
inside the tangent ideal or duplicates a slot) or use an exponent that breaks
the ``t2 u + u^3`` pattern.  They are encoded as printed; ``pattern=True``
swaps in the pattern-consistent correction listed in ``Entry.corrections``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Sequence

from .jetalgebra import CheckReport, is_PR_versal, stability_certificate
from .polyring import Poly, VarSpace

M_TIMES = 2
SERIES_R = {"A": 0, "D": 0, "E": 0, "B": 1, "C": 1, "F": 1}
SUB = str.maketrans("0123456789+-", "₀₁₂₃₄₅₆₇₈₉⁺⁻")


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class NormalFormLabel:
    series: str
    index: int
    sign: int | None = None
    m: int = M_TIMES

    def __post_init__(self):
        if self.series not in SERIES_R:
            raise CatalogError(f"unknown series {self.series!r}")
        if self.sign not in (None, 1, -1):
            raise CatalogError("sign must be +1, -1 or None")

    @property
    def r(self) -> int:
        return SERIES_R[self.series]

    @property
    def key(self) -> str:
        """Sign-free identifier, e.g. ``2D4``."""
        return f"{self.m}{self.series}{self.index}"

    def __str__(self):
        s = {None: "", 1: "+", -1: "-"}[self.sign]
        return f"{self.key}{s}"

    def pretty(self) -> str:
        s = {None: "", 1: "⁺", -1: "⁻"}[self.sign]
        return f"²{self.series}{str(self.index).translate(SUB)}{s}"

    def latex(self) -> str:
        s = {None: "", 1: "^+", -1: "^-"}[self.sign]
        return f"{{}}^{self.m}{self.series}_{self.index}{s}"

    @classmethod
    def parse(cls, text: str) -> "NormalFormLabel":
        t = text.strip().replace("²", "2").replace("^", "").replace("_", "")
        t = t.translate(str.maketrans("₀₁₂₃₄₅₆₇₈₉⁺⁻", "0123456789+-"))
        mt = re.fullmatch(r"(2)?([ABCDEF])(\d+)([+-]|pm)?", t)
        if mt is None:
            raise CatalogError(f"cannot parse label {text!r}")
        sign = {None: None, "+": 1, "-": -1, "pm": None}[mt.group(4)]
        return cls(mt.group(2), int(mt.group(3)), sign)


# Monomials in (x, y) are tuples of exponents: (x,) for r=1,k=0; (y,) for k=1;
# (y1, y2) for k=2; (x, y) for r=1,k=1.
@dataclass(frozen=True)
class Entry:
    series: str
    index: int
    k: int
    f: tuple                  # ((exponents, signed), ...) in printed order
    phi0: tuple
    slots: tuple              # phi_1 .. phi_{j-1}
    tail: str                 # "open" | "single" | "none"
    a_power: int = 3
    tail_start_printed: int | None = None
    signed: bool = False
    corrections: dict = field(default_factory=dict)
    note: str = ""

    @property
    def r(self) -> int:
        return SERIES_R[self.series]

    @property
    def j(self) -> int:
        """Index of the base variable inside a(u, t)."""
        return len(self.slots) + 1

    @property
    def lmax(self) -> int:
        return 6 if self.r == 0 else 4

    @property
    def key(self) -> str:
        return f"2{self.series}{self.index}"

    def label(self, sign: int | None = None) -> NormalFormLabel:
        if self.signed and sign is None:
            sign = 1
        return NormalFormLabel(self.series, self.index, sign if self.signed else None)

    def admissible(self) -> list[int]:
        if self.tail == "open":
            return list(range(self.j, self.lmax + 1))
        if self.tail == "single":
            return [self.j, self.j + 1]
        return [self.j]

    # ----------------------------------------------------------- printing
    def _mono(self, e: Sequence[int]) -> str:
        names = _xy_names(self.r, self.k)
        out = []
        for name, p in zip(names, e):
            if p == 1:
                out.append(name)
            elif p > 1:
                out.append(f"{name}^{p}")
        return "".join(out)

    def _f_latex(self, sign: str | None) -> str:
        parts = []
        for i, (e, signed) in enumerate(self.f):
            if signed:
                s = r"\pm " if sign is None else ("-" if sign == "-" else ("+" if i else ""))
            else:
                s = "+" if i else ""
            parts.append(s + self._mono(e))
        return "".join(parts)

    def template_latex(self) -> list[str]:
        """The printed formula(s) of this entry, with ``\\pm`` and ``\\ldots``."""
        j = self.j
        head = f"t_1+t_2u_{j}+u_{j}^{self.a_power}"
        if self.tail == "open":
            s = self.tail_start_printed or j + 1
            tails = [rf"\pm u_{s}^2\pm \ldots \pm u_l^2"]
        elif self.tail == "single":
            tails = ["", rf"\pm u_{j + 1}^2"]
        else:
            tails = [""]
        out = []
        for tail in tails:
            out.append(self._f_latex(None) + f"+({head}{tail})" + self._mono(self.phi0)
                       + self._slots_latex())
        return out

    def _slots_latex(self) -> str:
        return "".join(f"+u_{i}{self._mono(phi)}" for i, phi in enumerate(self.slots, 1))

    def to_dict(self) -> dict:
        return {
            "label": self.key + ("pm" if self.signed else ""),
            "series": self.series,
            "index": self.index,
            "r": self.r,
            "k": self.k,
            "m": M_TIMES,
            "a_variable": f"u{self.j}",
            "admissible_l": self.admissible(),
            "templates": self.template_latex(),
            "sign_parameter": self.signed,
            "tail": self.tail,
            "pattern_corrections": {k: list(v) if isinstance(v, tuple) else v
                                    for k, v in self.corrections.items()},
            "note": self.note,
        }


def _xy_names(r: int, k: int) -> list[str]:
    xs = ["x"] if r == 1 else []
    ys = ["y"] if k == 1 else [f"y_{i}" for i in range(1, k + 1)]
    return xs + ys


def _A(kk: int, tail: str) -> Entry:
    # y^{kk+1} + a y^{kk-1} + u1 y^{kk-2} + ... + u_{kk-1}
    slots = tuple(((kk - 1 - i),) for i in range(1, kk))
    return Entry("A", kk, 1, (((kk + 1,), False),), (kk - 1,), slots, tail)


ENTRIES: tuple[Entry, ...] = (
    _A(1, "open"),
    _A(2, "open"),
    _A(3, "open"),
    _A(4, "open"),
    _A(5, "single"),
    _A(6, "none"),
    Entry("D", 4, 2, (((2, 1), False), ((0, 3), True)), (0, 2),
          ((0, 1), (1, 0), (0, 0)), "open", signed=True),
    Entry("D", 5, 2, (((2, 1), False), ((0, 4), False)), (0, 3),
          ((0, 2), (0, 1), (1, 0), (0, 0)), "single"),
    Entry("D", 6, 2, (((2, 1), False), ((0, 5), True)), (0, 6),
          ((0, 3), (0, 2), (0, 1), (1, 0), (0, 0)), "none", signed=True,
          corrections={"phi0": (0, 4)},
          note="printed multiplier y_2^6 lies in the tangent ideal; pattern gives y_2^4"),
    Entry("E", 6, 2, (((3, 0), False), ((0, 4), False)), (1, 2),
          ((1, 1), (0, 2), (1, 0), (0, 1), (0, 0)), "none"),
    Entry("B", 2, 0, (((2,), False),), (1,), ((0,),), "open", tail_start_printed=2,
          note="printed tail starts at u_2 (inside a); instances use u_3..u_l"),
    Entry("B", 3, 0, (((3,), False),), (1,), ((1,), (0,)), "single",
          corrections={"phi0": (2,)},
          note="printed a-multiplier x repeats the u_1 slot; pattern gives x^2"),
    Entry("B", 4, 0, (((4,), False),), (2,), ((2,), (1,), (0,)), "none",
          corrections={"phi0": (3,)},
          note="printed a-multiplier x^2 repeats the u_1 slot; pattern gives x^3"),
    Entry("C", 3, 1, (((1, 1), True), ((0, 3), False)), (1, 0), ((0, 1), (0, 0)), "single",
          a_power=2, signed=True, corrections={"a_power": 3},
          note="printed u_3^2 makes the t_2 u_3 coupling redundant; pattern gives u_3^3"),
    Entry("C", 4, 1, (((1, 1), False), ((0, 4), False)), (0, 3), ((0, 2), (0, 1), (0, 0)), "none"),
    Entry("F", 4, 1, (((2, 0), False), ((0, 3), False)), (1, 1), ((1, 0), (0, 1), (0, 0)), "none"),
)


def list_entries(r: int, m: int = M_TIMES) -> list[Entry]:
    if m != M_TIMES or r not in (0, 1):
        raise CatalogError(f"no classification for r={r}, m={m}")
    return [e for e in ENTRIES if e.r == r]


def all_entries() -> list[Entry]:
    return list(ENTRIES)


def get_entry(label: NormalFormLabel | str) -> Entry:
    if isinstance(label, str):
        label = NormalFormLabel.parse(label)
    for e in ENTRIES:
        if e.series == label.series and e.index == label.index:
            return e
    raise CatalogError(f"{label} is not in the classification")


# ------------------------------------------------------------ instances
@dataclass(frozen=True)
class GeneratingFamily:
    """A normal form F(x, y, u, t); the front value is z = F on the critical set."""

    poly: Poly
    label: NormalFormLabel | None = None
    a: Poly | None = None
    phi0: Poly | None = None
    slots: tuple = ()
    tail_signs: tuple = ()
    pattern: bool = False
    latex: str = ""

    def __post_init__(self):
        if self.poly.constant_term():
            raise CatalogError("F(0) must vanish")
        sp = self.poly.space
        for i in range(1, len(self.slots) + 1):
            if self.poly.linear_occurrence(f"u{i}") is None:
                raise CatalogError(f"u{i} must occur linearly")
        if sp.m < 1:
            raise CatalogError("a generating family needs time variables")

    @property
    def space(self) -> VarSpace:
        return self.poly.space

    @property
    def name(self) -> str:
        return self.label.pretty() if self.label else "F"

    def constant_slot(self) -> str | None:
        """Base variable whose slot multiplier is the constant 1 (acts like -z)."""
        for i, phi in enumerate(self.slots, 1):
            if phi == 1:
                return f"u{i}"
        return None

    def tail_variables(self) -> list[str]:
        j = len(self.slots) + 1
        return [f"u{i}" for i in range(j + 1, j + 1 + len(self.tail_signs))]

    def replace(self, poly: Poly, a: Poly | None = None) -> "GeneratingFamily":
        return GeneratingFamily(poly, self.label, a, self.phi0, self.slots,
                                self.tail_signs, self.pattern, "")

    def to_dict(self) -> dict:
        return {
            "label": str(self.label) if self.label else None,
            "space": {"r": self.space.r, "k": self.space.k, "n": self.space.n, "m": self.space.m},
            "poly": self.poly.to_text(),
            "latex": self.latex,
            "tail_signs": list(self.tail_signs),
            "pattern": self.pattern,
        }


def _xy_poly(space: VarSpace, r: int, k: int, e: Sequence[int]) -> Poly:
    names = (["x1"] if r else []) + [f"y{i}" for i in range(1, k + 1)]
    out = space.const(1)
    for name, p in zip(names, e):
        if p:
            out = out * space.var(name) ** p
    return out


def instantiate(label: NormalFormLabel | str, l: int | None = None,
                signs: Sequence[int] = (), pattern: bool = False) -> GeneratingFamily:
    """Concrete family for ``label`` with ``l`` base variables.

    ``signs`` are the Morse tail signs (length ``l - j``); the sign in a
    ``±`` label comes from the label itself.  ``pattern`` applies the
    entry's pattern-consistent correction, when it has one.
    """
    if isinstance(label, str):
        label = NormalFormLabel.parse(label)
    entry = get_entry(label)
    if entry.signed and label.sign is None:
        raise CatalogError(f"{entry.key} needs a sign: {entry.key}+ or {entry.key}-")
    if not entry.signed and label.sign is not None:
        raise CatalogError(f"{entry.key} takes no sign")
    j = entry.j
    if l is None:
        l = j
    if l not in entry.admissible():
        raise CatalogError(f"l={l} outside admissible {entry.admissible()} for {entry.key}")
    signs = tuple(int(s) for s in signs)
    if len(signs) != l - j or any(s not in (1, -1) for s in signs):
        raise CatalogError(f"{entry.key} with l={l} needs {l - j} tail signs of +-1")

    fix = entry.corrections if pattern else {}
    phi0_e = fix.get("phi0", entry.phi0)
    a_power = fix.get("a_power", entry.a_power)

    space = VarSpace(entry.r, entry.k, l, M_TIMES)
    t1, t2 = space.var("t1"), space.var("t2")
    uj = space.var(f"u{j}")
    a = t1 + t2 * uj + uj ** a_power
    for i, s in zip(range(j + 1, l + 1), signs):
        a = a + space.var(f"u{i}") ** 2 * s
    f = space.zero()
    for e, signed in entry.f:
        f = f + _xy_poly(space, entry.r, entry.k, e) * (label.sign if signed else 1)
    phi0 = _xy_poly(space, entry.r, entry.k, phi0_e)
    slots = tuple(_xy_poly(space, entry.r, entry.k, e) for e in entry.slots)
    F = f + a * phi0
    for i, phi in enumerate(slots, 1):
        F = F + space.var(f"u{i}") * phi

    sgn = {1: "+", -1: "-"}[label.sign] if entry.signed else None
    e2 = Entry(entry.series, entry.index, entry.k, entry.f, phi0_e, entry.slots, entry.tail)
    tail = "".join(("+" if s > 0 else "-") + f"u_{i}^2" for i, s in zip(range(j + 1, l + 1), signs))
    latex = (e2._f_latex(sgn) + f"+(t_1+t_2u_{j}+u_{j}^{a_power}{tail})" + e2._mono(phi0_e)
             + e2._slots_latex())
    return GeneratingFamily(F, label, a, phi0, slots, signs, pattern and bool(fix), latex)


def minimal_instance(entry: Entry, sign: int = 1, pattern: bool = False) -> GeneratingFamily:
    return instantiate(entry.label(sign), entry.j, (), pattern)


# ------------------------------------------------------------- tampering
def drop_terms(family: GeneratingFamily, predicate) -> GeneratingFamily:
    """Family with every term whose exponent vector satisfies ``predicate`` removed."""
    sp = family.space
    keep = {e: c for e, c in family.poly.terms.items() if not predicate(sp, e)}
    a = None
    if family.a is not None:
        a = Poly(sp, {e: c for e, c in family.a.terms.items() if not predicate(sp, e)})
    return GeneratingFamily(Poly(sp, keep), family.label, a, family.phi0, family.slots,
                            family.tail_signs, family.pattern, "")


def _has(sp: VarSpace, e, name: str) -> bool:
    return bool(e[sp.index(name)])


def delete_slot_term(family: GeneratingFamily) -> GeneratingFamily:
    """Remove the time-free terms containing u1 (the u1 phi_1 slot; u1^3 for 2A1)."""
    times = family.space.block_indices("t")
    return drop_terms(family, lambda sp, e: _has(sp, e, "u1") and not any(e[i] for i in times))


def delete_coupling_term(family: GeneratingFamily) -> GeneratingFamily:
    """Remove the t2 u_j coupling."""
    return drop_terms(family, lambda sp, e: _has(sp, e, "t2"))


# ------------------------------------------------------------ validation
def validate_entry(entry: Entry | str, l: int | None = None, signs: Sequence[int] = (),
                   sign: int = 1, pattern: bool = False) -> CheckReport:
    """Stability of the instance plus P-R versality of its a(u, t)."""
    if isinstance(entry, str):
        entry = get_entry(entry)
    fam = instantiate(entry.label(sign), l, signs, pattern)
    return validate_family(fam)


def validate_family(fam: GeneratingFamily) -> CheckReport:
    st = stability_certificate(fam)
    parts = [st]
    if fam.a is not None:
        parts.append(is_PR_versal(fam.a))
    ok = all(p.verdict for p in parts)
    witness = tuple(f"{p.method}:{w}" for p in parts for w in p.witness)
    notes = "; ".join(f"{p.method} {'ok' if p.verdict else 'fails'} at order {p.order}" for p in parts)
    return CheckReport(ok, st.order, sum(p.corank for p in parts), witness, "validate", notes)


def export_json() -> str:
    doc = {
        "schema": "retfront.catalog/1",
        "m": M_TIMES,
        "entries": [e.to_dict() for e in ENTRIES],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
