"""Shipped test forms.

Each entry is ``(name, form, generalized_curve_expected)``.  Most are exact
differentials ``df`` (always generalized curves); a few are logarithmic or
linear forms, and the last is a saddle-node kept as a negative example.
"""

CORPUS: tuple[tuple[str, str, bool], ...] = (
    ("cusp", "2*y*dy - 3*x^2*dx", True),
    ("radial", "x*dy - y*dx", True),
    ("saddle", "y*dx + x*dy", True),
    ("node-irrational", "-(x + 2*y)*dx + (x + y)*dy", True),
    ("a4-curve", "2*y*dy - 5*x^4*dx", True),
    ("cusp-and-line", "(-y^2 - 3*x^2*y + 4*x^3)*dx + (3*y^2 - 2*x*y - x^3)*dy", True),
    ("tacnode", "2*y*dy - 4*x^3*dx", True),
    ("tacnode-irrational", "2*y*dy - 8*x^3*dx", True),
    ("three-lines", "(3*x^2 - 3*y^2)*dx - 6*x*y*dy", True),
    ("cusp-conjugate-pair", "3*x^2*dx - 3*y^2*dy", True),
    ("a6-curve", "2*y*dy - 7*x^6*dx", True),
    ("e6-curve", "3*y^2*dy - 4*x^3*dx", True),
    ("resonant-node", "x*dy - 2*y*dx", True),
    ("e6-cubic-fifth", "3*y^2*dy - 5*x^4*dx", True),
    ("logarithmic", "(y^2 - 3*x*y)*dx + (2*x^2 - 2*x*y)*dy", True),
    ("four-lines", "(3*x^2*y - y^3)*dx + (x^3 - 3*x*y^2)*dy", True),
    ("saddle-node", "x^2*dy - y*dx", False),
)


def corpus_forms(include_saddle_node: bool = True) -> list[tuple[str, str, bool]]:
    return [c for c in CORPUS if include_saddle_node or c[2]]
