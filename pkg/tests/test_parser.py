import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from foliation_moduli.parser import ParseError, format_one_form, parse_one_form, parse_polynomial
from foliation_moduli.poly import OneForm, Poly2


def test_cusp_form():
    w = parse_one_form("2*y*dy - 3*x^2*dx")
    assert w.a == Poly2({(2, 0): -3})
    assert w.b == Poly2({(0, 1): 2})


def test_grouped_coefficients_and_powers():
    w = parse_one_form("(x + y)^2*dx - (1/2)*x**3*dy")
    assert w.a == Poly2({(2, 0): 1, (1, 1): 2, (0, 2): 1})
    assert w.b == Poly2({(3, 0): mpq(-1, 2)})


@pytest.mark.parametrize(
    "text",
    ["x*dy - y*dx)", "x*dy +", "dx*dy", "x^y*dx", "x*dz", "", "3*x"],
)
def test_malformed_inputs(text):
    with pytest.raises((ParseError, ValueError)):
        parse_one_form(text)


def test_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse_one_form("x*dy - y*dx)")
    assert info.value.position == 11


coef = st.integers(min_value=-5, max_value=5)
poly = st.dictionaries(
    st.tuples(st.integers(0, 4), st.integers(0, 4)), coef.filter(bool), min_size=1, max_size=5
).map(Poly2)


@settings(max_examples=80, deadline=None)
@given(poly, poly)
def test_print_parse_round_trip(a, b):
    w = OneForm(a, b)
    assert parse_one_form(format_one_form(w)) == w


def test_polynomial_with_custom_variables():
    p = parse_polynomial("z1 + 1/2*z2^2", ("z1", "z2"))
    assert p.terms == {(1, 0): mpq(1), (0, 2): mpq(1, 2)}


def test_exact_differential():
    assert parse_one_form("d(y^2 - x^3)") == parse_one_form("2*y*dy - 3*x^2*dx")
    assert parse_one_form("x*d(x*y)") == parse_one_form("x*y*dx + x^2*dy")


@pytest.mark.parametrize("text", ["d(dx)", "d(x", "d"])
def test_exact_differential_errors(text):
    with pytest.raises(ParseError):
        parse_one_form(text)
