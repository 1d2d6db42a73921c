"""Exact reduction of plane foliation singularities and moduli invariants."""

from .field import QQ, AlgElem, Tower, UndeterminedError, adjoin_root
from .parser import ParseError, format_one_form, parse_one_form
from .poly import OneForm, Poly2, VectorField2, dual_vector_field, linear_part, multiplicity, order_at_origin

__all__ = [
    "QQ",
    "AlgElem",
    "Tower",
    "UndeterminedError",
    "adjoin_root",
    "ParseError",
    "parse_one_form",
    "format_one_form",
    "OneForm",
    "Poly2",
    "VectorField2",
    "dual_vector_field",
    "linear_part",
    "multiplicity",
    "order_at_origin",
]

__version__ = "0.1.0"
