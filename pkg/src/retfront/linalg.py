"""Sparse exact row reduction over the rationals.

Rows are ``{column: coefficient}`` dicts.  Rational rows are cleared to
integers on entry; elimination is fraction-free (cross multiplication
followed by division by the row content), so entries stay integral and small.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping

import numpy as np


def integral_row(row: Mapping[int, Fraction | int]) -> dict[int, int]:
    den = 1
    for c in row.values():
        if isinstance(c, Fraction):
            den = lcm(den, c.denominator)
    out = {}
    for col, c in row.items():
        v = c * den
        if v:
            out[col] = int(v)
    return _primitive(out)


def _primitive(row: dict[int, int]) -> dict[int, int]:
    if not row:
        return row
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    lead = row[min(row)]
    if lead < 0:
        g = -g
    if g != 1:
        row = {c: v // g for c, v in row.items()}
    return row


class Echelon:
    """Incremental row echelon form; the pivot of a row is its smallest column."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: dict[int, dict[int, int]] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _reduce(self, row: dict[int, int]) -> dict[int, int]:
        pivots = self.pivots
        while row:
            lead = min(row)
            p = pivots.get(lead)
            if p is None:
                return row
            a = p[lead]
            b = row[lead]
            g = gcd(a, b)
            a //= g
            b //= g
            # row <- a*row - b*p
            new = {c: a * v for c, v in row.items()} if a != 1 else dict(row)
            for c, v in p.items():
                s = new.get(c, 0) - b * v
                if s:
                    new[c] = s
                else:
                    new.pop(c, None)
            row = _primitive(new)
        return row

    def add(self, row: Mapping[int, Fraction | int]) -> bool:
        """Insert a row; returns True when the rank grew."""
        r = self._reduce(integral_row(row))
        if not r:
            return False
        self.pivots[min(r)] = r
        return True

    def extend(self, rows: Iterable[Mapping]) -> "Echelon":
        for row in rows:
            self.add(row)
            if len(self.pivots) == self.ncols:
                break
        return self

    def contains(self, row: Mapping[int, Fraction | int]) -> bool:
        return not self._reduce(integral_row(row))

    def contains_unit(self, col: int) -> bool:
        if col not in self.pivots:
            return False
        return not self._reduce({col: 1})

    def pivot_columns(self) -> list[int]:
        return sorted(self.pivots)


def exact_rank(rows: Iterable[Mapping], ncols: int) -> int:
    return Echelon(ncols).extend(rows).rank


def float_rank(rows: Iterable[Mapping], ncols: int, tol: float = 1e-9) -> int:
    """Dense SVD rank; rows are scaled to unit max-norm first."""
    rows = [r for r in rows if r]
    if not rows or ncols == 0:
        return 0
    a = np.zeros((len(rows), ncols))
    for i, r in enumerate(rows):
        for c, v in r.items():
            a[i, c] = float(v)
        a[i] /= np.abs(a[i]).max()
    s = np.linalg.svd(a, compute_uv=False)
    return int((s > tol * s[0]).sum())
