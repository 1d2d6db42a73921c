"""Sparse bivariate polynomials, 1-forms and their dual vector fields."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping

from gmpy2 import mpq

from .field import (
    AlgElem,
    QQ,
    Tower,
    coerce,
    common_tower,
    format_elem,
    is_rational,
    is_zero,
    lower,
    rational,
    tower_of,
)

__all__ = [
    "Poly2",
    "OneForm",
    "VectorField2",
    "LinearPart",
    "order_at_origin",
    "multiplicity",
    "dual_vector_field",
    "linear_part",
    "contract",
]


def _scalar(c):
    if isinstance(c, AlgElem):
        return c
    return rational(c)


class Poly2:
    """Polynomial in x, y stored as ``{(i, j): coeff}`` with no zero entries.

    Instances are treated as immutable; equality is structural, which is
    mathematical equality because zero coefficients are never stored.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None):
        clean = {}
        if terms:
            for (i, j), c in terms.items():
                if i < 0 or j < 0:
                    raise ValueError("negative exponent")
                if not is_zero(c):
                    clean[(int(i), int(j))] = _scalar(c)
        self.terms = clean

    @classmethod
    def _raw(cls, terms: dict) -> "Poly2":
        p = cls.__new__(cls)
        p.terms = terms
        return p

    @classmethod
    def const(cls, c) -> "Poly2":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, i: int, j: int, c=1) -> "Poly2":
        return cls({(i, j): c})

    x: "Poly2"
    y: "Poly2"

    # -- basic protocol --------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, Poly2):
            if self.terms.keys() != other.terms.keys():
                return False
            return all(self.terms[k] == other.terms[k] for k in self.terms)
        if isinstance(other, (int, type(mpq()))):
            return self == Poly2.const(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset((k, hash(v)) for k, v in self.terms.items()))

    def __iter__(self) -> Iterator[tuple[tuple[int, int], object]]:
        return iter(sorted(self.terms.items()))

    def __len__(self):
        return len(self.terms)

    def coeff(self, i: int, j: int):
        return self.terms.get((i, j), mpq(0))

    @property
    def tower(self) -> Tower:
        return common_tower(*(tower_of(c) for c in self.terms.values())) if self.terms else QQ

    def lift(self, tower: Tower) -> "Poly2":
        return Poly2._raw({k: coerce(c, tower) for k, c in self.terms.items()})

    def is_rational(self) -> bool:
        return all(is_rational(c) for c in self.terms.values())

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Poly2):
            other = Poly2.const(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k)
            v = c if v is None else v + c
            if is_zero(v):
                out.pop(k, None)
            else:
                out[k] = v
        return Poly2._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly2._raw({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly2):
            other = Poly2.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly2):
            if is_zero(other):
                return Poly2()
            return Poly2._raw({k: c * other for k, c in self.terms.items()})
        out: dict = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                v = out.get(k)
                out[k] = c1 * c2 if v is None else v + c1 * c2
        return Poly2({k: v for k, v in out.items()})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly2.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- structure -------------------------------------------------------
    def order(self) -> int | float:
        """Lowest total degree of a monomial; ``math.inf`` for zero."""
        if not self.terms:
            return math.inf
        return min(i + j for i, j in self.terms)

    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    def homogeneous_part(self, d: int) -> "Poly2":
        return Poly2._raw({k: c for k, c in self.terms.items() if k[0] + k[1] == d})

    def value_at_origin(self):
        return self.terms.get((0, 0), mpq(0))

    def diff_x(self) -> "Poly2":
        return Poly2({(i - 1, j): c * i for (i, j), c in self.terms.items() if i})

    def diff_y(self) -> "Poly2":
        return Poly2({(i, j - 1): c * j for (i, j), c in self.terms.items() if j})

    def x_valuation(self) -> int | float:
        return min((i for i, _ in self.terms), default=math.inf)

    def y_valuation(self) -> int | float:
        return min((j for _, j in self.terms), default=math.inf)

    def div_x(self, k: int) -> "Poly2":
        if self.x_valuation() < k:
            raise ValueError(f"polynomial is not divisible by x^{k}")
        return Poly2._raw({(i - k, j): c for (i, j), c in self.terms.items()})

    def div_y(self, k: int) -> "Poly2":
        if self.y_valuation() < k:
            raise ValueError(f"polynomial is not divisible by y^{k}")
        return Poly2._raw({(i, j - k): c for (i, j), c in self.terms.items()})

    def chart0(self) -> "Poly2":
        """p(x, x*y)."""
        return Poly2._raw({(i + j, j): c for (i, j), c in self.terms.items()})

    def chart1(self) -> "Poly2":
        """p(x*y, y)."""
        return Poly2._raw({(i, i + j): c for (i, j), c in self.terms.items()})

    def translate(self, cx=0, cy=0) -> "Poly2":
        """p(x + cx, y + cy)."""
        if is_zero(cx) and is_zero(cy):
            return self
        out: dict = {}
        for (i, j), c in self.terms.items():
            xs = _binomial_row(i, cx)
            ys = _binomial_row(j, cy)
            for a, ca in enumerate(xs):
                if is_zero(ca):
                    continue
                for b, cb in enumerate(ys):
                    if is_zero(cb):
                        continue
                    v = c * ca * cb
                    k = (a, b)
                    out[k] = v if k not in out else out[k] + v
        return Poly2(out)

    def restrict_x0(self) -> list:
        """Coefficients (low -> high) of p(0, y)."""
        items = [(j, c) for (i, j), c in self.terms.items() if i == 0]
        if not items:
            return []
        out = [mpq(0)] * (max(j for j, _ in items) + 1)
        for j, c in items:
            out[j] = c
        return out

    def restrict_y0(self) -> list:
        items = [(i, c) for (i, j), c in self.terms.items() if j == 0]
        if not items:
            return []
        out = [mpq(0)] * (max(i for i, _ in items) + 1)
        for i, c in items:
            out[i] = c
        return out

    # -- printing --------------------------------------------------------
    def sorted_terms(self) -> list:
        """Canonical order: decreasing total degree, then decreasing x-degree."""
        return sorted(self.terms.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), -kv[0][0]))

    def format(self) -> str:
        """Print in the input grammar; algebraic coefficients print with generators a1, a2, ..."""
        if not self.terms:
            return "0"
        pieces = []
        for (i, j), c in self.sorted_terms():
            mono = "*".join(
                s for s in (_power("x", i), _power("y", j)) if s
            )
            if isinstance(c, AlgElem) and not is_rational(c):
                body = f"({format_elem(c)})"
                sign = "+"
            else:
                q = rational(lower(c))
                sign = "-" if q < 0 else "+"
                q = abs(q)
                body = "" if (q == 1 and mono) else str(q)
            term = "*".join(s for s in (body, mono) if s)
            pieces.append((sign, term))
        out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, term in pieces[1:]:
            out += f" {sign} {term}"
        return out

    def __repr__(self):
        return f"Poly2({self.format()})"

    __str__ = format


def _power(v: str, k: int) -> str:
    if k == 0:
        return ""
    return v if k == 1 else f"{v}^{k}"


def _binomial_row(n: int, c) -> list:
    """Coefficients of (t + c)^n in t."""
    row = [mpq(0)] * (n + 1)
    binom = 1
    cpow = [mpq(1)]
    for _ in range(n):
        cpow.append(cpow[-1] * c)
    for k in range(n + 1):
        row[k] = cpow[n - k] * binom
        binom = binom * (n - k) // (k + 1)
    return row


Poly2.x = Poly2({(1, 0): 1})
Poly2.y = Poly2({(0, 1): 1})


@dataclass(frozen=True)
class OneForm:
    """``a dx + b dy``."""

    a: Poly2
    b: Poly2

    def __post_init__(self):
        if not self.a and not self.b:
            raise ValueError("zero 1-form")

    @property
    def tower(self) -> Tower:
        return common_tower(self.a.tower, self.b.tower)

    def lift(self, tower: Tower) -> "OneForm":
        return OneForm(self.a.lift(tower), self.b.lift(tower))

    def translate(self, cx=0, cy=0) -> "OneForm":
        return OneForm(self.a.translate(cx, cy), self.b.translate(cx, cy))

    def is_singular_at_origin(self) -> bool:
        return is_zero(self.a.value_at_origin()) and is_zero(self.b.value_at_origin())

    def __str__(self):
        from .parser import format_one_form

        return format_one_form(self)


@dataclass(frozen=True)
class VectorField2:
    """``p d/dx + q d/dy``."""

    p: Poly2
    q: Poly2

    def apply(self, f: Poly2) -> Poly2:
        return self.p * f.diff_x() + self.q * f.diff_y()


def order_at_origin(p: Poly2) -> int | float:
    return p.order()


def multiplicity(omega: OneForm) -> int:
    return int(min(omega.a.order(), omega.b.order()))


def dual_vector_field(omega: OneForm) -> VectorField2:
    """The vector field ``b d/dx - a d/dy`` annihilated by ``omega``."""
    return VectorField2(omega.b, -omega.a)


def contract(X: VectorField2, omega: OneForm) -> Poly2:
    return omega.a * X.p + omega.b * X.q


@dataclass(frozen=True)
class LinearPart:
    """Jacobian of a vector field at the origin, rows (dp, dq)."""

    matrix: tuple[tuple[object, object], tuple[object, object]]
    regular: bool

    @property
    def trace(self):
        return self.matrix[0][0] + self.matrix[1][1]

    @property
    def det(self):
        (a, b), (c, d) = self.matrix
        return a * d - b * c


def linear_part(X: VectorField2) -> LinearPart:
    regular = not (is_zero(X.p.value_at_origin()) and is_zero(X.q.value_at_origin()))
    m = (
        (X.p.coeff(1, 0), X.p.coeff(0, 1)),
        (X.q.coeff(1, 0), X.q.coeff(0, 1)),
    )
    return LinearPart(m, regular)
