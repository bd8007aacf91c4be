"""Exact multivariate polynomials over a block-graded variable space.

Variables come in four blocks, always in this order:

    x1..xr   corner coordinates (constrained to x >= 0 geometrically)
    y1..yk   internal coordinates
    u1..un   base (unfolding) coordinates
    t1..tm   time coordinates

Coefficients are :class:`fractions.Fraction`; floats only appear in
:meth:`Poly.eval`.  Terms are kept in a dict keyed by exponent tuples and
printed graded-lexicographically (higher degree first, and inside a degree
the variable earlier in the block order wins).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np

BLOCKS = ("x", "y", "u", "t")

Monomial = tuple  # exponent tuple, one entry per variable
Scalar = Union[int, Fraction]


class SpaceMismatch(ValueError):
    """Two polynomials (or a polynomial and a binding) live in different spaces."""


@dataclass(frozen=True)
class VarSpace:
    r: int = 0
    k: int = 0
    n: int = 0
    m: int = 0

    def __post_init__(self):
        for name in BLOCKS_FIELDS:
            if getattr(self, name) < 0:
                raise ValueError(f"block size {name} must be >= 0")

    @property
    def nvars(self) -> int:
        return self.r + self.k + self.n + self.m

    @cached_property
    def names(self) -> tuple[str, ...]:
        out = []
        for block, size in zip(BLOCKS, (self.r, self.k, self.n, self.m)):
            out.extend(f"{block}{i}" for i in range(1, size + 1))
        return tuple(out)

    @cached_property
    def _lookup(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    def index(self, var: Union[int, str]) -> int:
        """Position of ``var`` (a name such as ``"u2"`` or an index)."""
        if isinstance(var, (int, np.integer)) and not isinstance(var, bool):
            if 0 <= var < self.nvars:
                return int(var)
        elif isinstance(var, str) and var in self._lookup:
            return self._lookup[var]
        raise ValueError(f"unknown variable {var!r} in {self}")

    def block_of(self, var: Union[int, str]) -> str:
        return self.names[self.index(var)][0]

    def block_indices(self, *blocks: str) -> list[int]:
        return [i for i, name in enumerate(self.names) if name[0] in blocks]

    def var(self, name: Union[int, str]) -> "Poly":
        i = self.index(name)
        e = [0] * self.nvars
        e[i] = 1
        return Poly(self, {tuple(e): 1})

    def gens(self) -> tuple["Poly", ...]:
        return tuple(self.var(i) for i in range(self.nvars))

    def zero(self) -> "Poly":
        return Poly(self)

    def const(self, c: Scalar) -> "Poly":
        return Poly(self, {(0,) * self.nvars: c})

    def one_hot(self, i: int, power: int = 1) -> Monomial:
        e = [0] * self.nvars
        e[i] = power
        return tuple(e)


BLOCKS_FIELDS = ("r", "k", "n", "m")


def mono_degree(e: Monomial) -> int:
    return sum(e)


def print_key(e: Monomial):
    """Sort key giving the canonical printing order (descending grlex)."""
    return (-sum(e), tuple(-a for a in e))


def basis_key(e: Monomial):
    """Sort key for jet bases: ascending degree, grlex inside a degree."""
    return (sum(e), tuple(-a for a in e))


def mono_name(space: VarSpace, e: Monomial) -> str:
    parts = []
    for name, a in zip(space.names, e):
        if a == 1:
            parts.append(name)
        elif a > 1:
            parts.append(f"{name}^{a}")
    return "*".join(parts) if parts else "1"


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, np.integer)) and not isinstance(c, bool):
        return Fraction(int(c))
    raise TypeError(f"exact coefficient required, got {type(c).__name__}")


class LinearSplit(NamedTuple):
    coefficient: "Poly"
    remainder: "Poly"


class Poly:
    """Immutable polynomial with exact rational coefficients."""

    __slots__ = ("space", "_terms", "_hash", "_tree")

    def __init__(self, space: VarSpace, terms: Mapping[Monomial, Scalar] | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[Monomial, Fraction] = {}
        nv = space.nvars
        for e, c in items:
            e = tuple(int(a) for a in e)
            if len(e) != nv or any(a < 0 for a in e):
                raise ValueError(f"bad exponent vector {e} for {space}")
            c = _as_fraction(c)
            if c:
                s = clean.get(e, 0) + c
                if s:
                    clean[e] = s
                else:
                    clean.pop(e, None)
        self.space = space
        self._terms = clean
        self._hash = None
        self._tree = None

    # ------------------------------------------------------------------ basics
    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return MappingProxyType(self._terms)

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self._terms.items(), key=lambda it: print_key(it[0]))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    @property
    def valuation(self) -> int | None:
        """Lowest total degree of a term, ``None`` for zero."""
        return min((sum(e) for e in self._terms), default=None)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.space.nvars, Fraction(0))

    def free_vars(self) -> list[int]:
        used = set()
        for e in self._terms:
            used.update(i for i, a in enumerate(e) if a)
        return sorted(used)

    def involves(self, var) -> bool:
        i = self.space.index(var)
        return any(e[i] for e in self._terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.space == other.space and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == self.space.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.space, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"Poly({self.to_text()!r}, {self.space})"

    def __str__(self):
        return self.to_text()

    # -------------------------------------------------------------- arithmetic
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.space != self.space:
                raise SpaceMismatch(f"{self.space} vs {other.space}")
            return other
        if isinstance(other, (int, Fraction, np.integer)) and not isinstance(other, bool):
            return self.space.const(other)
        raise TypeError(f"cannot combine Poly with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return _raw(self.space, out)

    __radd__ = __add__

    def __neg__(self):
        return _raw(self.space, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict[Monomial, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return _raw(self.space, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = self.space.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c: Scalar) -> "Poly":
        c = _as_fraction(c)
        if not c:
            return self.space.zero()
        return _raw(self.space, {e: c * v for e, v in self._terms.items()})

    # ---------------------------------------------------------------- calculus
    def derive(self, var) -> "Poly":
        i = self.space.index(var)
        out = {}
        for e, c in self._terms.items():
            a = e[i]
            if a:
                out[e[:i] + (a - 1,) + e[i + 1:]] = c * a
        return _raw(self.space, out)

    def truncate(self, order: int) -> "Poly":
        if order < 0:
            raise ValueError("order must be >= 0")
        return _raw(self.space, {e: c for e, c in self._terms.items() if sum(e) <= order})

    def substitute(self, bindings: Mapping) -> "Poly":
        """Simultaneous substitution ``var -> Poly`` (or exact scalar)."""
        sub: dict[int, Poly] = {}
        for var, value in bindings.items():
            sub[self.space.index(var)] = self._coerce(value)
        if not sub:
            return self
        powers: dict[tuple[int, int], Poly] = {}

        def power(i, a):
            key = (i, a)
            if key not in powers:
                powers[key] = sub[i] ** a
            return powers[key]

        result = self.space.zero()
        for e, c in self._terms.items():
            kept = tuple(0 if i in sub else a for i, a in enumerate(e))
            term = _raw(self.space, {kept: c})
            for i, a in enumerate(e):
                if a and i in sub:
                    term = term * power(i, a)
            result = result + term
        return result

    def restrict(self, **values) -> "Poly":
        """Shorthand: ``f.restrict(t1=0, u1=0)``."""
        return self.substitute(values)

    def linear_occurrence(self, var) -> LinearSplit | None:
        """Split ``f = c * v + rest`` with ``c`` and ``rest`` free of ``v``.

        Returns ``None`` when ``v`` appears with exponent >= 2.
        """
        i = self.space.index(var)
        coef, rest = {}, {}
        for e, c in self._terms.items():
            if e[i] > 1:
                return None
            if e[i] == 1:
                coef[e[:i] + (0,) + e[i + 1:]] = c
            else:
                rest[e] = c
        return LinearSplit(_raw(self.space, coef), _raw(self.space, rest))

    # -------------------------------------------------------------- evaluation
    def _horner(self):
        if self._tree is None:
            items = [(e, float(c)) for e, c in self.sorted_terms()]
            self._tree = _build_tree(items, 0, self.space.nvars)
        return self._tree

    def eval(self, point: Sequence):
        """Float evaluation by nested Horner; ``point`` entries may be arrays."""
        if len(point) != self.space.nvars:
            raise ValueError(f"expected {self.space.nvars} coordinates, got {len(point)}")
        return _eval_tree(self._horner(), point, 0)

    def __call__(self, *point):
        return self.eval(point)

    # ---------------------------------------------------------- serialization
    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            coef = f"{c.numerator}/{c.denominator}"
            name = mono_name(self.space, e)
            parts.append(coef if name == "1" else f"{coef}*{name}")
        return " + ".join(parts)

    @classmethod
    def from_text(cls, space: VarSpace, text: str) -> "Poly":
        """Inverse of :meth:`to_text`; also accepts loose input like ``y1^2 - 3*u1``."""
        text = text.strip()
        if text in ("", "0"):
            return space.zero()
        terms: dict[Monomial, Fraction] = {}
        for sign, body in _split_terms(text):
            coef = Fraction(sign)
            e = [0] * space.nvars
            for factor in body.split("*"):
                factor = factor.strip()
                if not factor:
                    raise ValueError(f"empty factor in {text!r}")
                m = _FACTOR.fullmatch(factor)
                if m is None:
                    raise ValueError(f"cannot parse factor {factor!r}")
                if m.group("num") is not None:
                    coef *= Fraction(m.group("num"))
                else:
                    power = int(m.group("pow") or 1)
                    e[space.index(m.group("var"))] += power
            e = tuple(e)
            s = terms.get(e, 0) + coef
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return _raw(space, terms)


_FACTOR = re.compile(r"(?P<num>\d+(?:/\d+)?)|(?P<var>[xyut]\d+)(?:\^(?P<pow>\d+))?")


def _split_terms(text: str):
    # "a + -b - c" -> [(1, "a"), (-1, "b"), (-1, "c")]
    out = []
    pos = 0
    for m in _TERM.finditer(text):
        if m.start() != pos or not m.group(2).strip():
            raise ValueError(f"cannot parse {text!r}")
        pos = m.end()
        sign = -1 if m.group(1).count("-") % 2 else 1
        out.append((sign, m.group(2).strip()))
    if pos != len(text):
        raise ValueError(f"cannot parse {text!r}")
    return out


_TERM = re.compile(r"\s*((?:[+-]\s*)*)([^+\-]+)")


def _raw(space: VarSpace, terms: dict) -> Poly:
    # trusted constructor: terms already clean
    p = Poly.__new__(Poly)
    p.space = space
    p._terms = terms
    p._hash = None
    p._tree = None
    return p


def _build_tree(items, i, nv):
    # Horner tree over variable i: list of (exponent, subtree) in descending exponent
    if i == nv:
        return sum(c for _, c in items)
    groups: dict[int, list] = {}
    for e, c in items:
        groups.setdefault(e[i], []).append((e, c))
    return [(a, _build_tree(groups[a], i + 1, nv)) for a in sorted(groups, reverse=True)]


def _eval_tree(tree, point, i):
    if not isinstance(tree, list):
        return tree
    x = point[i]
    acc = 0.0
    prev = None
    for a, sub in tree:
        if prev is not None:
            acc = acc * x ** (prev - a)
        acc = acc + _eval_tree(sub, point, i + 1)
        prev = a
    if prev:
        acc = acc * x ** prev
    return acc


def arith(a: Poly, b: Poly, kind: str) -> Poly:
    if a.space != b.space:
        raise SpaceMismatch(f"{a.space} vs {b.space}")
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    raise ValueError(f"unknown operation {kind!r}")


def derive(f: Poly, v) -> Poly:
    return f.derive(v)


def substitute(f: Poly, bindings: Mapping) -> Poly:
    return f.substitute(bindings)


def truncate(f: Poly, order: int) -> Poly:
    return f.truncate(order)


def linear_occurrence(f: Poly, v) -> LinearSplit | None:
    return f.linear_occurrence(v)


def parse(space: VarSpace, text: str) -> Poly:
    return Poly.from_text(space, text)
