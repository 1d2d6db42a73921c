from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from foliation_moduli.parser import parse_one_form
from foliation_moduli.poly import (
    OneForm,
    Poly2,
    contract,
    dual_vector_field,
    linear_part,
    multiplicity,
)

coef = st.integers(min_value=-4, max_value=4)
poly = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3)), coef.filter(bool), min_size=1, max_size=4
).map(Poly2)


@settings(max_examples=60, deadline=None)
@given(poly, poly)
def test_dual_field_annihilates_form(a, b):
    w = OneForm(a, b)
    assert not contract(dual_vector_field(w), w)


def _substitute(p: Poly2, X: Poly2, Y: Poly2) -> Poly2:
    out = Poly2()
    for (i, j), c in p.terms.items():
        out = out + Poly2.const(c) * X ** i * Y ** j
    return out


def _linear_change(w: OneForm, m) -> OneForm:
    """Pull back by (x, y) -> (m00 x + m01 y, m10 x + m11 y)."""
    (a, b), (c, d) = m
    X = Poly2({(1, 0): a, (0, 1): b})
    Y = Poly2({(1, 0): c, (0, 1): d})
    A = _substitute(w.a, X, Y)
    B = _substitute(w.b, X, Y)
    return OneForm(A * Poly2.const(a) + B * Poly2.const(c), A * Poly2.const(b) + B * Poly2.const(d))


@settings(max_examples=40, deadline=None)
@given(poly, poly, st.sampled_from([((1, 1), (0, 1)), ((2, 1), (1, 1)), ((0, 1), (1, 0)), ((1, -3), (2, 1))]))
def test_multiplicity_invariant_under_linear_change(a, b, m):
    w = OneForm(a, b)
    assert multiplicity(_linear_change(w, m)) == multiplicity(w)


def test_linear_part_of_saddle():
    X = dual_vector_field(parse_one_form("y*dx + x*dy"))
    lp = linear_part(X)
    assert lp.matrix == ((mpq(1), mpq(0)), (mpq(0), mpq(-1)))
    assert lp.trace == 0 and lp.det == -1
    assert not lp.regular


def test_multiplicity_of_cusp():
    assert multiplicity(parse_one_form("2*y*dy - 3*x^2*dx")) == 1
    assert multiplicity(parse_one_form("x^2*dy - y^2*dx")) == 2
