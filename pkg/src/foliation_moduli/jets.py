"""Truncated bivariate jets with formal parameters.

A :class:`JetRing` fixes the space order ``N`` (total degree in ``z1, z2``),
a list of formal parameters with individual degree caps, and a scalar tower.
Elements are stored as ``flint.fmpq_mpoly`` in the variables
``z1, z2, <params>, a1..ak`` where ``a1..ak`` are the tower generators.
Every product is followed by truncation (drop space degree > N and parameter
degree > cap) and by reduction of the generators modulo their minimal
polynomials, so equality of jets is equality of canonical forms.
"""

from __future__ import annotations

from math import factorial
from typing import Iterable, Sequence

import flint

from .field import QQ, AlgElem, Tower, coerce, rational, tower_of

__all__ = [
    "JetRing",
    "Jet",
    "JetVectorField",
    "JetMap",
    "NotTangentError",
    "flow",
    "compose",
    "inverse",
    "identity_map",
    "pushforward",
]


class NotTangentError(ValueError):
    """Raised when a field or an inner map does not fix the expansion point."""


def _fmpq(q) -> flint.fmpq:
    q = rational(q)
    return flint.fmpq(int(q.numerator), int(q.denominator))


class JetRing:
    """Truncation data shared by a family of jets.

    Internally every monomial ``z1^i z2^j`` carries a grading variable
    ``h^(i+j)`` so that dropping space degree above ``N`` is a single
    monomial remainder, done by flint rather than in Python.
    """

    def __init__(self, order: int, params: Sequence[str] = (), caps=None, tower: Tower = QQ):
        if order < 0:
            raise ValueError("order must be non-negative")
        self.order = order
        self.params = tuple(params)
        if caps is None:
            caps = [order] * len(self.params)
        elif isinstance(caps, dict):
            caps = [caps.get(p, order) for p in self.params]
        self.caps = tuple(int(c) for c in caps)
        if len(self.caps) != len(self.params):
            raise ValueError("one cap per parameter")
        self.tower = tower
        self.levels = [t for t in tower.chain() if t.level > 0]
        # generators highest level first, so lex leading terms of the
        # minimal polynomials are pure powers of the top generator
        alpha_names = tuple(f"a{t.level}" for t in reversed(self.levels))
        names = ("z1", "z2") + self.params + alpha_names + ("h",)
        if len(set(names)) != len(names):
            raise ValueError(f"clashing variable names {names}")
        self.names = names
        self.ctx = flint.fmpq_mpoly_ctx.get(names, "lex")
        self.nvars = len(names)
        self._p0 = 2
        self._a0 = 2 + len(self.params)
        self._h = self.nvars - 1
        gens = self.ctx.gens()
        self._hgen = gens[self._h]
        self._hcut = self._hgen ** (order + 1)
        self._pcuts = [gens[self._p0 + k] ** (c + 1) for k, c in enumerate(self.caps)]
        self._minpolys = [self._monic_minpoly(t) for t in reversed(self.levels)]
        self.zero = Jet(self, self.ctx.from_dict({}))
        self.one = self.scalar(1)
        self.z1 = Jet(self, gens[0] * self._hgen)
        self.z2 = Jet(self, gens[1] * self._hgen)

    def __eq__(self, other):
        return (
            isinstance(other, JetRing)
            and self.order == other.order
            and self.params == other.params
            and self.caps == other.caps
            and self.tower == other.tower
        )

    def __hash__(self):
        return hash((self.order, self.params, self.caps, self.tower))

    def __repr__(self):
        return f"JetRing(order={self.order}, params={self.params}, caps={self.caps})"

    # -- exponent layout -------------------------------------------------------
    def _alpha_index(self, level: int) -> int:
        return self._a0 + len(self.levels) - level

    def _exp(self, i: int = 0, j: int = 0, pexp=None, alphas=None) -> tuple:
        e = [0] * self.nvars
        e[0], e[1], e[self._h] = i, j, i + j
        if pexp:
            for k, v in enumerate(pexp):
                e[self._p0 + k] = v
        if alphas:
            for level, v in alphas.items():
                e[self._alpha_index(level)] = v
        return tuple(e)

    def _split(self, e: tuple) -> tuple[tuple, tuple, tuple]:
        """(space exponents, parameter exponents, generator exponents by level)."""
        al = tuple(e[self._alpha_index(t.level)] for t in self.levels)
        return (e[0], e[1]), tuple(e[self._p0:self._a0]), al

    # -- construction ------------------------------------------------------
    def _monic_minpoly(self, t: Tower):
        m = list(t.minpoly)
        lead = coerce(m[-1], t.base)
        out = self.ctx.from_dict({self._exp(alphas={t.level: len(m) - 1}): 1})
        for i in range(len(m) - 1):
            c = coerce(m[i], t.base) / lead
            out = out + self._elem_poly(c) * self.ctx.from_dict({self._exp(alphas={t.level: i}): 1})
        return out

    def _elem_poly(self, x):
        if not isinstance(x, AlgElem):
            return self.ctx.from_dict({self._exp(): _fmpq(x)})
        if not self.tower.contains(x.tower):
            raise ValueError(f"scalar {x!r} is outside the ring tower")
        level = x.tower.level
        out = self.ctx.from_dict({})
        for i, c in enumerate(x.coeffs):
            if not (isinstance(c, AlgElem) or c != 0):
                continue
            out = out + self._elem_poly(c) * self.ctx.from_dict({self._exp(alphas={level: i}): 1})
        return out

    def scalar(self, x) -> "Jet":
        return Jet(self, self._elem_poly(x))

    def param(self, name: str) -> "Jet":
        i = self.params.index(name)
        return self.wrap(self.ctx.gens()[self._p0 + i])

    def monomial(self, i: int, j: int, coeff=1) -> "Jet":
        return self.wrap(self.ctx.from_dict({self._exp(i, j): 1}) * self._elem_poly(coeff))

    def from_terms(self, terms: dict) -> "Jet":
        """Build a parameter-free jet from ``{(i, j): scalar}``."""
        acc = self.ctx.from_dict({})
        for (i, j), c in terms.items():
            acc = acc + self.ctx.from_dict({self._exp(i, j): 1}) * self._elem_poly(c)
        return self.wrap(acc)

    def wrap(self, p) -> "Jet":
        return Jet(self, self.truncate(p))

    # -- truncation ----------------------------------------------------------
    def truncate(self, p):
        p = p % self._hcut
        for cut in self._pcuts:
            p = p % cut
        for m in self._minpolys:
            p = p % m
        return p

    # -- reading back --------------------------------------------------------
    def alpha_to_elem(self, alphas: dict):
        """Turn ``{generator exponents by level: fmpq}`` back into a field element."""
        acc = coerce(0, self.tower)
        for ex, c in alphas.items():
            term = coerce(rational(f"{c.numer()}/{c.denom()}"), self.tower)
            for lv, k in enumerate(ex):
                if k:
                    term = term * coerce(self.levels[lv].generator, self.tower) ** int(k)
            acc = acc + term
        return acc


class Jet:
    __slots__ = ("ring", "p")

    def __init__(self, ring: JetRing, p):
        self.ring = ring
        self.p = p

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.ring is not self.ring and other.ring != self.ring:
                raise ValueError("jets from different rings")
            return other
        return self.ring.scalar(other)

    def __add__(self, other):
        return Jet(self.ring, self.p + self._lift(other).p)

    __radd__ = __add__

    def __sub__(self, other):
        return Jet(self.ring, self.p - self._lift(other).p)

    def __rsub__(self, other):
        return Jet(self.ring, self._lift(other).p - self.p)

    def __neg__(self):
        return Jet(self.ring, -self.p)

    def __mul__(self, other):
        o = self._lift(other)
        return self.ring.wrap(self.p * o.p)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = self.ring.one
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Jet):
            try:
                other = self._lift(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.p == other.p

    def __hash__(self):
        return hash(str(self.p))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"Jet({self.format()})"

    def is_zero(self) -> bool:
        return self.p.is_zero()

    def diff(self, var) -> "Jet":
        """Partial derivative in ``z1``/``z2`` (0/1) or in a named parameter."""
        if var in (0, 1, "z1", "z2"):
            idx = 0 if var in (0, "z1") else 1
            # the grading variable drops by one together with the space degree
            return Jet(self.ring, self.p.derivative(idx) / self.ring._hgen)
        idx = self.ring._p0 + self.ring.params.index(var)
        return Jet(self.ring, self.p.derivative(idx))

    def terms(self) -> Iterable[tuple[tuple, tuple, tuple, flint.fmpq]]:
        for e, c in self.p.to_dict().items():
            s, pr, al = self.ring._split(e)
            yield s, pr, al, c

    def space_terms(self) -> dict:
        """``{(i, j): coefficient jet}`` where coefficients carry params and generators."""
        groups: dict = {}
        h = self.ring._h
        for e, c in self.p.to_dict().items():
            rest = list(e)
            rest[0] = rest[1] = rest[h] = 0
            groups.setdefault((e[0], e[1]), {})[tuple(rest)] = c
        return {k: Jet(self.ring, self.ring.ctx.from_dict(v)) for k, v in groups.items()}

    def coefficient(self, i: int, j: int) -> "Jet":
        return self.space_terms().get((i, j), self.ring.zero)

    def min_space_degree(self) -> int | None:
        degs = [e[0] + e[1] for e in self.p.to_dict()]
        return min(degs) if degs else None

    def drop_params(self, names: Iterable[str]) -> "Jet":
        """Set the named parameters to 0."""
        return Jet(self.ring, self.p.subs({n: 0 for n in names}))

    def param_coefficient(self, name: str, degree: int = 1) -> "Jet":
        """Coefficient of ``name**degree``, with that parameter removed."""
        k = self.ring._p0 + self.ring.params.index(name)
        out = {}
        for e, c in self.p.to_dict().items():
            if e[k] == degree:
                e = list(e)
                e[k] = 0
                out[tuple(e)] = c
        return Jet(self.ring, self.ring.ctx.from_dict(out))

    def evaluate_params(self, values: dict) -> "Jet":
        vals = {n: _fmpq(v) for n, v in values.items()}
        return self.ring.wrap(self.p.subs(vals))

    def depends_on_params(self) -> bool:
        return any(any(pr) for _, pr, _, _ in self.terms())

    def coefficients(self) -> dict:
        """Parameter-free view ``{(i, j): field element}``; params must be absent."""
        out: dict = {}
        for (s, pr, al, c) in self.terms():
            if any(pr):
                raise ValueError("jet still depends on formal parameters")
            out.setdefault(s, {})[al] = c
        return {k: self.ring.alpha_to_elem(v) for k, v in out.items()}

    def format(self) -> str:
        return str(self.p.subs({"h": 1}))


class JetVectorField:
    """``Z = c1 d/dz1 + c2 d/dz2`` with jet components."""

    __slots__ = ("c1", "c2")

    def __init__(self, c1: Jet, c2: Jet):
        self.c1 = c1
        self.c2 = c2

    @property
    def ring(self) -> JetRing:
        return self.c1.ring

    def apply(self, f: Jet) -> Jet:
        return self.c1 * f.diff(0) + self.c2 * f.diff(1)

    def vanishes_at_origin(self) -> bool:
        for c in (self.c1, self.c2):
            for s, pr, al, _ in c.terms():
                if s == (0, 0):
                    return False
        return True

    def __neg__(self):
        return JetVectorField(-self.c1, -self.c2)

    def __add__(self, other):
        return JetVectorField(self.c1 + other.c1, self.c2 + other.c2)

    def __sub__(self, other):
        return JetVectorField(self.c1 - other.c1, self.c2 - other.c2)

    def scale(self, s) -> "JetVectorField":
        return JetVectorField(self.c1 * s, self.c2 * s)

    def __eq__(self, other):
        return isinstance(other, JetVectorField) and self.c1 == other.c1 and self.c2 == other.c2

    def __repr__(self):
        return f"JetVectorField({self.c1.format()}, {self.c2.format()})"

    def is_zero(self) -> bool:
        return self.c1.is_zero() and self.c2.is_zero()


class JetMap:
    """A self-map ``(z1, z2) -> (f1, f2)`` whose components may carry parameters."""

    __slots__ = ("f1", "f2")

    def __init__(self, f1: Jet, f2: Jet):
        self.f1 = f1
        self.f2 = f2

    @property
    def ring(self) -> JetRing:
        return self.f1.ring

    @property
    def components(self) -> tuple[Jet, Jet]:
        return (self.f1, self.f2)

    def fixes_origin(self) -> bool:
        return JetVectorField(self.f1, self.f2).vanishes_at_origin()

    def __eq__(self, other):
        return isinstance(other, JetMap) and self.f1 == other.f1 and self.f2 == other.f2

    def __repr__(self):
        return f"JetMap({self.f1.format()}, {self.f2.format()})"

    def map(self, fn) -> "JetMap":
        return JetMap(fn(self.f1), fn(self.f2))

    def __call__(self, inner: "JetMap") -> "JetMap":
        return compose(self, inner)


def identity_map(ring: JetRing) -> JetMap:
    return JetMap(ring.z1, ring.z2)


def linear_map(ring: JetRing, matrix) -> JetMap:
    (a, b), (c, d) = matrix
    return JetMap(ring.z1 * a + ring.z2 * b, ring.z1 * c + ring.z2 * d)


def flow(Z: JetVectorField, time: Jet) -> JetMap:
    """``exp(Z)[time]`` by the Lie series ``sum time^k/k! Z^k(z_i)``.

    ``Z`` must vanish at the origin and ``time`` must have no constant term;
    both make the series finite after truncation.
    """
    if not Z.vanishes_at_origin():
        raise NotTangentError("the field does not vanish at the expansion point")
    ring = Z.ring
    for s, pr, al, _ in time.terms():
        if not any(pr):
            raise ValueError("flow time must be a formal parameter series without constant term")
    comps = []
    for v in (ring.z1, ring.z2):
        acc = v
        term = v
        tk = ring.one
        k = 0
        while True:
            k += 1
            term = Z.apply(term)
            tk = tk * time
            if term.is_zero() or tk.is_zero():
                break
            acc = acc + (tk * term) * rational(f"1/{factorial(k)}")
        comps.append(acc)
    return JetMap(*comps)


def _substitute(f: Jet, pow1: list, pow2: list) -> Jet:
    ring = f.ring
    groups: dict = {}
    for (i, j), coeff in f.space_terms().items():
        groups.setdefault(i, []).append((j, coeff))
    acc = ring.zero
    for i, row in groups.items():
        inner = ring.zero
        for j, coeff in row:
            inner = inner + pow2[j] * coeff
        if i:
            # pow1[i] has order >= i, so only degree <= N - i of inner matters
            cut = inner.p % ring._hgen ** (ring.order - i + 1)
            acc = acc + ring.wrap(pow1[i].p * cut)
        else:
            acc = acc + inner
    return acc


def _powers(g: Jet, n: int) -> list:
    out = [g.ring.one]
    for _ in range(n):
        out.append(out[-1] * g)
    return out


def compose(outer: JetMap, inner: JetMap) -> JetMap:
    """``outer o inner``; ``inner`` must fix the origin."""
    if not inner.fixes_origin():
        raise NotTangentError("inner map does not fix the expansion point")
    N = outer.ring.order
    p1 = _powers(inner.f1, N)
    p2 = _powers(inner.f2, N)
    return JetMap(
        _substitute(outer.f1, p1, p2),
        _substitute(outer.f2, p1, p2),
    )


def compose_function(f: Jet, inner: JetMap) -> Jet:
    if not inner.fixes_origin():
        raise NotTangentError("inner map does not fix the expansion point")
    N = f.ring.order
    return _substitute(f, _powers(inner.f1, N), _powers(inner.f2, N))


def _unit_inverse(u: Jet) -> Jet:
    """Inverse of a space-constant jet whose parameter-free part is a nonzero scalar."""
    ring = u.ring
    const = {}
    for s, pr, al, c in u.terms():
        if s != (0, 0):
            raise ValueError("unit inverse needs a space-constant jet")
        if not any(pr):
            const[al] = c
    if not const:
        raise ZeroDivisionError("jet is not a unit")
    inv0 = ring.scalar(1 / ring.alpha_to_elem(const))
    delta = (u - ring.scalar(ring.alpha_to_elem(const))) * inv0
    acc = ring.one
    term = ring.one
    while True:
        term = -(term * delta)
        if term.is_zero():
            break
        acc = acc + term
    return acc * inv0


def linear_part(F: JetMap) -> list:
    out = []
    for f in (F.f1, F.f2):
        st = f.space_terms()
        out.append([st.get((1, 0), F.ring.zero), st.get((0, 1), F.ring.zero)])
    return out


def inverse(F: JetMap) -> JetMap:
    """Compositional inverse by fixed-point iteration on ``G = L^-1 (m - H(G))``."""
    if not F.fixes_origin():
        raise NotTangentError("map does not fix the expansion point")
    ring = F.ring
    (a, b), (c, d) = linear_part(F)
    det = a * d - b * c
    idet = _unit_inverse(det)
    li = [[d * idet, -b * idet], [-c * idet, a * idet]]
    lin = JetMap(ring.z1 * a + ring.z2 * b, ring.z1 * c + ring.z2 * d)
    H = JetMap(F.f1 - lin.f1, F.f2 - lin.f2)
    G = JetMap(ring.z1 * li[0][0] + ring.z2 * li[0][1], ring.z1 * li[1][0] + ring.z2 * li[1][1])
    for _ in range(ring.order):
        HG = compose(H, G)
        r1 = ring.z1 - HG.f1
        r2 = ring.z2 - HG.f2
        nxt = JetMap(li[0][0] * r1 + li[0][1] * r2, li[1][0] * r1 + li[1][1] * r2)
        if nxt == G:
            break
        G = nxt
    return G


def jacobian(F: JetMap) -> list:
    return [[F.f1.diff(0), F.f1.diff(1)], [F.f2.diff(0), F.f2.diff(1)]]


def pushforward(phi: JetMap, X: JetVectorField) -> JetVectorField:
    """``phi_* X = (Dphi . X) o phi^-1``; exact to the ring order since ``X(0) = 0``."""
    J = jacobian(phi)
    v1 = J[0][0] * X.c1 + J[0][1] * X.c2
    v2 = J[1][0] * X.c1 + J[1][1] * X.c2
    back = inverse(phi)
    return JetVectorField(compose_function(v1, back), compose_function(v2, back))


__all__ += ["linear_map", "linear_part", "compose_function", "jacobian"]
