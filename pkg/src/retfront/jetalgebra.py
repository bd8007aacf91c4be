"""Linear algebra in truncated local algebras.

Every check here reduces a module-membership question to the rank of an exact
matrix whose rows are truncated products ``generator * multiplier`` written
in a monomial jet basis.  The coefficient ring of a generator matters: the
tangent space of a time-dependent unfolding mixes modules over

    E(x, y, u, t)  for F, x_i dF/dx_i, dF/dy_j
    E(u, t)        for dF/du_a
    E(t)           for dF/dt_b

so each :class:`ModuleSpec` carries the blocks its multipliers may use.

Finite-order conclusions rest on the truncation lemma for such mixed
modules (a Malgrange-preparation corollary, in its reticular form): if

    E = B + A2 + A1 + M(t) E + M(u,t)^(d+1) E

with A1 generated over E(t) by d elements, then E = B + A2 + A1.
:func:`stability_certificate` uses it to replace the full ring by the finite
dimensional quotient ``E(x,y,u) / M(u)^(m+1)`` and then closes the remaining
ideal part with Nakayama's lemma, so its verdict is exact whenever a
certificate order is found.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from operator import add as _add
from typing import Iterable

from .linalg import Echelon, float_rank
from .polyring import Poly, VarSpace, basis_key, mono_name

MAX_DETERMINACY = 7
MAX_CERTIFICATE_ORDER = 40


# ----------------------------------------------------------------- jet bases
@dataclass(frozen=True)
class JetBasis:
    """Monomials of degree <= ``order``, optionally capped in some blocks.

    ``cap`` = (blocks, d) drops monomials whose degree in those blocks exceeds
    ``d``; that realises the quotient by ``M(blocks)^(d+1)``.
    """

    space: VarSpace
    order: int
    cap: tuple | None = None

    @cached_property
    def monomials(self) -> tuple[tuple, ...]:
        nv = self.space.nvars
        capped = set(self.space.block_indices(*self.cap[0])) if self.cap else set()
        limit = self.cap[1] if self.cap else None
        out = []

        def grow(i, e, left, cap_left):
            if i == nv:
                out.append(tuple(e))
                return
            top = left if i not in capped else min(left, cap_left)
            for a in range(top + 1):
                e.append(a)
                grow(i + 1, e, left - a, cap_left - a if i in capped else cap_left)
                e.pop()

        grow(0, [], self.order, limit if limit is not None else self.order)
        return tuple(sorted(out, key=basis_key))

    @cached_property
    def index(self) -> dict[tuple, int]:
        return {e: i for i, e in enumerate(self.monomials)}

    def __len__(self):
        return len(self.monomials)

    def name(self, col: int) -> str:
        return mono_name(self.space, self.monomials[col])

    def degree_slice(self, d: int) -> list[int]:
        return [i for i, e in enumerate(self.monomials) if sum(e) == d]


def monomial_basis(space: VarSpace, order: int) -> JetBasis:
    if order < 0:
        raise ValueError("order must be >= 0")
    return JetBasis(space, order)


def basis_size(nvars: int, order: int) -> int:
    return comb(order + nvars, nvars)


# ------------------------------------------------------------- module specs
ALL = ("x", "y", "u", "t")


@dataclass(frozen=True)
class ModuleSpec:
    """Generators with the blocks their multipliers may come from.

    ``blocks=()`` means real constants only.  ``min_degree`` shifts the
    multipliers into a power of the maximal ideal (``M * <g>`` is
    ``min_degree=1``).
    """

    generators: tuple
    blocks: tuple = ALL
    min_degree: int = 0


@dataclass
class SpanMatrix:
    basis: JetBasis
    rows: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    @property
    def shape(self):
        return (len(self.rows), len(self.basis))

    def dense(self):
        import numpy as np

        a = np.zeros(self.shape, dtype=object)
        for i, r in enumerate(self.rows):
            for c, v in r.items():
                a[i, c] = v
        return a


def _multipliers(basis: JetBasis, blocks: tuple) -> list[tuple]:
    allowed = set(basis.space.block_indices(*blocks))
    return [e for e in basis.monomials
            if all(a == 0 or i in allowed for i, a in enumerate(e))]


def _rows_for(spec: ModuleSpec, basis: JetBasis):
    space = basis.space
    idx = basis.index
    mults = _multipliers(basis, spec.blocks)
    for g in spec.generators:
        if g.space != space:
            raise ValueError(f"generator lives in {g.space}, basis in {space}")
        if g.is_zero():
            continue
        room = basis.order - g.valuation
        if room < spec.min_degree:
            continue
        terms = list(g.terms.items())
        for mult in mults:
            d = sum(mult)
            if d > room:
                break
            if d < spec.min_degree:
                continue
            row = {}
            for e, c in terms:
                col = idx.get(tuple(map(_add, e, mult)))
                if col is not None:
                    row[col] = c
            if row:
                yield row, (g, mult)


def span(spec: ModuleSpec, basis: JetBasis) -> SpanMatrix:
    """Truncations of ``generator * multiplier`` in ``basis``, one row each."""
    out = SpanMatrix(basis)
    for row, label in _rows_for(spec, basis):
        out.rows.append(row)
        out.labels.append(label)
    return out


# ------------------------------------------------------------------ reports
@dataclass(frozen=True)
class CheckReport:
    verdict: bool
    order: int
    corank: int
    witness: tuple[str, ...] = ()
    method: str = "jet"
    notes: str = ""

    def __post_init__(self):
        if self.verdict != (self.corank == 0) or self.verdict != (not self.witness):
            raise ValueError("inconsistent report")

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "order": self.order,
            "corank": self.corank,
            "witness": list(self.witness),
            "method": self.method,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def __bool__(self):
        return self.verdict


def _minimal_witness(basis: JetBasis, ech: Echelon) -> tuple[str, ...]:
    missing = [c for c in range(len(basis)) if not ech.contains_unit(c)]
    mons = [basis.monomials[c] for c in missing]
    minimal = []
    for c, e in zip(missing, mons):
        if not any(f != e and all(a <= b for a, b in zip(f, e)) for f in mons):
            minimal.append(c)
    return tuple(basis.name(c) for c in minimal)


def _report(basis: JetBasis, ech: Echelon, method: str, notes: str = "", order=None) -> CheckReport:
    corank = len(basis) - ech.rank
    witness = _minimal_witness(basis, ech) if corank else ()
    return CheckReport(corank == 0, basis.order if order is None else order, corank, witness, method, notes)


def check_span(specs: Iterable[ModuleSpec], basis: JetBasis, method: str = "jet",
               exact: bool = True) -> CheckReport:
    """Does the sum of the module specs span the whole of ``basis``?

    ``exact=False`` adds a float SVD cross-check; a disagreement raises.
    """
    ech = Echelon(len(basis))
    rows = []
    for spec in specs:
        for row, _ in _rows_for(spec, basis):
            ech.add(row)
            if not exact:
                rows.append(row)
    rep = _report(basis, ech, method)
    if not exact:
        frank = float_rank(rows, len(basis))
        if frank != ech.rank:
            raise ArithmeticError(f"float rank {frank} disagrees with exact rank {ech.rank}")
    return rep


# -------------------------------------------------------------- space tools
def subspace_poly(f: Poly, space: VarSpace) -> Poly:
    """Re-express ``f`` over a space whose variable names are a subset."""
    names = f.space.names
    target = {name: i for i, name in enumerate(space.names)}
    terms = {}
    for e, c in f.terms.items():
        new = [0] * space.nvars
        for name, a in zip(names, e):
            if a:
                if name not in target:
                    raise ValueError(f"{f} involves {name}, absent from {space}")
                new[target[name]] = a
        terms[tuple(new)] = c
    return Poly(space, terms)


def _as_poly(F) -> Poly:
    return F.poly if hasattr(F, "poly") else F


def germ_at_origin(F) -> Poly:
    """``F(x, y, 0, 0)`` as a polynomial over the (x, y) space."""
    F = _as_poly(F)
    sp = F.space
    zero = {name: 0 for name in sp.names if name[0] in "ut"}
    return subspace_poly(F.substitute(zero), VarSpace(sp.r, sp.k))


def _xy_only(f0: Poly) -> Poly:
    sp = f0.space
    for i in f0.free_vars():
        if sp.names[i][0] not in "xy":
            raise ValueError(f"{f0} must only involve corner and internal variables")
    return subspace_poly(f0, VarSpace(sp.r, sp.k))


def _reticular_K_generators(f0: Poly):
    sp = f0.space
    xs = [f0.space.var(i) * f0.derive(i) for i in sp.block_indices("x")]
    ys = [f0.derive(i) for i in sp.block_indices("y")]
    return [f0] + xs, ys


# --------------------------------------------------------------- determinacy
def is_K_determined(f0: Poly, l: int) -> CheckReport:
    """Sufficient test for reticular K-l-determinacy of ``f0(x, y)``.

    Checks ``M^(l+1) c M(<f0, x df0/dx> + M <df0/dy>) + M^(l+2)``: every
    degree l+1 monomial must lie in the span of the truncated generators.
    A false verdict only says this test failed at ``l``.
    """
    f0 = _xy_only(f0)
    if f0.constant_term():
        raise ValueError("f0 must vanish at the origin")
    basis = JetBasis(f0.space, l + 1)
    gens, ys = _reticular_K_generators(f0)
    ech = Echelon(len(basis))
    for spec in (ModuleSpec(tuple(gens), ALL, 1), ModuleSpec(tuple(ys), ALL, 2)):
        for row, _ in _rows_for(spec, basis):
            ech.add(row)
    top = basis.degree_slice(l + 1)
    # deg l+1 columns come last, so the slice lies in the row space iff each is a pivot
    missing = [c for c in top if c not in ech.pivots]
    witness = tuple(basis.name(c) for c in missing)
    return CheckReport(not missing, l + 1, len(missing), witness, "determinacy")


def determinacy_degree(f0: Poly, cap: int = MAX_DETERMINACY) -> int | None:
    """Smallest ``l <= cap`` passing :func:`is_K_determined`."""
    for l in range(1, cap + 1):
        if is_K_determined(f0, l).verdict:
            return l
    return None


def stability_order(l: int, m: int) -> int:
    """Jet order ``lm + l + m + 1`` at which transversality decides stability."""
    if l < 0 or m < 0:
        raise ValueError("l and m must be >= 0")
    return l * m + l + m + 1


def K_codimension(f0: Poly, order: int) -> int | None:
    """dim M / (<f0, x df0/dx> + M <df0/dy>) computed at jet order ``order``.

    Returns ``None`` when the value at ``order`` differs from the value at
    ``order - 1`` (not yet stable, possibly infinite).
    """
    f0 = _xy_only(f0)
    if f0.constant_term():
        raise ValueError("f0 must vanish at the origin")

    def codim(N):
        basis = JetBasis(f0.space, N)
        gens, ys = _reticular_K_generators(f0)
        ech = Echelon(len(basis))
        for spec in (ModuleSpec(tuple(gens)), ModuleSpec(tuple(ys), ALL, 1)):
            for row, _ in _rows_for(spec, basis):
                ech.add(row)
        return len(basis) - 1 - ech.rank  # constants are not in M

    if order < 1:
        raise ValueError("order must be >= 1")
    here = codim(order)
    return here if codim(order - 1) == here else None


# ----------------------------------------------------------------- stability
def _time_split(F: Poly):
    sp = F.space
    gens, ys = [F], []
    gens += [sp.var(i) * F.derive(i) for i in sp.block_indices("x")]
    ys = [F.derive(i) for i in sp.block_indices("y")]
    us = [F.derive(i) for i in sp.block_indices("u")]
    ts = [F.derive(i) for i in sp.block_indices("t")]
    return gens + ys, us, ts


def tangent_specs(F) -> list[ModuleSpec]:
    """The three pieces of the t-P-K tangent space of ``F``."""
    F = _as_poly(F)
    ideal, us, ts = _time_split(F)
    return [
        ModuleSpec(tuple(ideal), ALL),
        ModuleSpec(tuple(us), ("u", "t")),
        ModuleSpec(tuple(ts), ("t",)),
    ]


def tangent_jet_check(F, order: int, exact: bool = True) -> CheckReport:
    """Does the truncated tangent space span all jets of degree <= order?

    This is a necessary condition for infinitesimal stability at every order.
    """
    F = _as_poly(F)
    if order < 1:
        raise ValueError("order must be >= 1")
    if F.constant_term():
        raise ValueError("F must vanish at the origin")
    return check_span(tangent_specs(F), JetBasis(F.space, order), "jet", exact)


def default_jet_order(F) -> int:
    F = _as_poly(F)
    l = determinacy_degree(germ_at_origin(F))
    if l is None:
        l = MAX_DETERMINACY
    return stability_order(l, F.space.m)


def stability_certificate(F, max_order: int = MAX_CERTIFICATE_ORDER) -> CheckReport:
    """Exact infinitesimal-stability test through the preparation lemma.

    Works in ``R = E(x, y, u) / M(u)^(m+1)`` (the image of ``E`` modulo
    ``M(t) E + M(u,t)^(m+1) E``) with

        I  = <F0, x dF0/dx, dF0/dy>_R        (an ideal, F0 = F|t=0)
        A2 = <dF0/du>_E(u)
        A1 = R <dF/dt |t=0>

    Searches the smallest N with ``M_R^N c I + M_R^(N+1)`` (then
    ``M_R^N c I`` by Nakayama) and checks that I + A2 + A1 spans ``R / M_R^(N+1)``.
    """
    F = _as_poly(F)
    if F.constant_term():
        raise ValueError("F must vanish at the origin")
    sp = F.space
    m = sp.m
    rspace = VarSpace(sp.r, sp.k, sp.n, 0)
    tzero = {name: 0 for name in sp.names if name[0] == "t"}
    F0 = subspace_poly(F.substitute(tzero), rspace)
    ideal, us, _ = _time_split(F0)
    ts = [subspace_poly(F.derive(i).substitute(tzero), rspace) for i in sp.block_indices("t")]
    specs = [
        ModuleSpec(tuple(ideal), ALL),
        ModuleSpec(tuple(us), ("u",)),
        ModuleSpec(tuple(ts), ()),
    ]
    for N in range(1, max_order + 1):
        basis = JetBasis(rspace, N, (("u",), m))
        ech = Echelon(len(basis))
        for row, _ in _rows_for(specs[0], basis):
            ech.add(row)
        top = basis.degree_slice(N)
        if any(c not in ech.pivots for c in top):
            continue
        for spec in specs[1:]:
            for row, _ in _rows_for(spec, basis):
                ech.add(row)
        return _report(basis, ech, "certificate",
                       f"ring E(x,y,u)/M(u)^{m + 1}; Nakayama order {N}")
    return CheckReport(False, max_order, 1, ("?",), "certificate",
                       f"no Nakayama order <= {max_order}; stability not proven")


def is_tPK_infinitesimally_stable(F, order: int | None = None, exact: bool = True) -> CheckReport:
    """Reticular t-P-K infinitesimal stability of a generating family.

    With ``order`` given this is the literal jet test
    (:func:`tangent_jet_check`); without it the exact certificate
    (:func:`stability_certificate`) decides.
    """
    if order is None:
        return stability_certificate(F)
    return tangent_jet_check(F, order, exact)


# ----------------------------------------------------------------- versality
def _ut_only(a: Poly) -> Poly:
    sp = a.space
    used_u = []
    for i in a.free_vars():
        name = sp.names[i]
        if name[0] in "xy":
            raise ValueError(f"{a} must not involve corner or internal variables")
        if name[0] == "u":
            used_u.append(name)
    # rename the occurring u's to u1..uk, keep all times
    space = VarSpace(0, 0, len(used_u), sp.m)
    rename = {old: f"u{j + 1}" for j, old in enumerate(used_u)}
    terms = {}
    for e, c in a.terms.items():
        new = [0] * space.nvars
        for name, p in zip(sp.names, e):
            if p:
                new[space.index(rename.get(name, name))] = p
        terms[tuple(new)] = c
    return Poly(space, terms)


def is_PR_versal(a: Poly, order: int = 4) -> CheckReport:
    """P-R versality of the time unfolding ``a(u, t)``.

    Spanning test for ``<da/du>_E(u,t) + <da/dt>_E(t) + R`` in the jets of
    order ``order`` over the u's that occur in ``a`` and all times.
    """
    a = _ut_only(a)
    if a.constant_term():
        raise ValueError("a must vanish at the origin")
    sp = a.space
    specs = [
        ModuleSpec(tuple(a.derive(i) for i in sp.block_indices("u")), ("u", "t")),
        ModuleSpec(tuple(a.derive(i) for i in sp.block_indices("t")), ("t",)),
        ModuleSpec((sp.const(1),), ()),
    ]
    return check_span(specs, JetBasis(sp, order), "versality")
