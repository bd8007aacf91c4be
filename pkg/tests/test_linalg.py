from fractions import Fraction

import sympy
from hypothesis import given
from hypothesis import strategies as st

from retfront.linalg import Echelon, exact_rank, float_rank

rows_st = st.lists(
    st.dictionaries(st.integers(0, 7), st.integers(-4, 4).filter(bool), max_size=5),
    max_size=9,
)


def dense(rows, n):
    return sympy.Matrix([[r.get(j, 0) for j in range(n)] for r in rows]) if rows else sympy.zeros(0, n)


@given(rows_st)
def test_rank_matches_sympy(rows):
    assert exact_rank(rows, 8) == dense(rows, 8).rank()


@given(rows_st, st.integers(1, 7))
def test_rank_invariant_under_row_scaling(rows, k):
    scaled = [{c: Fraction(v, k) * (i + 1) for c, v in r.items()} for i, r in enumerate(rows)]
    assert exact_rank(scaled, 8) == exact_rank(rows, 8)


@given(rows_st)
def test_float_rank_agrees_on_small_integers(rows):
    assert float_rank(rows, 8) == exact_rank(rows, 8)


@given(rows_st, st.dictionaries(st.integers(0, 7), st.integers(-3, 3), max_size=4))
def test_membership(rows, probe):
    ech = Echelon(8).extend(rows)
    m = dense(rows, 8)
    aug = m.col_join(sympy.Matrix([[probe.get(j, 0) for j in range(8)]])) if rows \
        else sympy.Matrix([[probe.get(j, 0) for j in range(8)]])
    assert ech.contains(probe) == (aug.rank() == m.rank())


def test_pivots_are_lead_columns():
    ech = Echelon(4)
    assert ech.add({2: 3, 3: 6})
    assert not ech.add({2: 1, 3: 2})
    assert ech.pivot_columns() == [2]
    assert ech.pivots[2] == {2: 1, 3: 2}
