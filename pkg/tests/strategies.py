from fractions import Fraction

from hypothesis import strategies as st

from retfront.polyring import Poly, VarSpace

SPACE = VarSpace(1, 1, 1, 1)

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)
monos = st.tuples(*[st.integers(0, 3)] * SPACE.nvars)


@st.composite
def polys(draw, space=SPACE, max_terms=5):
    terms = draw(st.dictionaries(monos, coeffs, max_size=max_terms))
    return Poly(space, terms)


points = st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=3),
                  min_size=SPACE.nvars, max_size=SPACE.nvars)


def exact_eval(p: Poly, pt) -> Fraction:
    total = Fraction(0)
    for e, c in p.terms.items():
        v = c
        for a, x in zip(e, pt):
            v *= Fraction(x) ** a
        total += v
    return total
