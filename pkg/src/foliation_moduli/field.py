"""Exact scalars: rationals and towers of simple algebraic extensions.

Rationals are ``gmpy2.mpq``.  An element of ``Q(a1)(a2)...(ak)`` is an
:class:`AlgElem` holding its coordinates over the level below, so elements
of different levels of the same tower mix freely.  Towers are compared
structurally (same chain of minimal polynomials means same field).

Every quadratic level over Q carries a designated complex embedding (the
root with positive real part, or positive imaginary part), which is what
:func:`real_sign` uses when it has to decide positivity.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
import sympy
from gmpy2 import mpq

__all__ = [
    "QQ",
    "Tower",
    "AlgElem",
    "UndeterminedError",
    "ReducibleError",
    "TowerLimitError",
    "DEFAULT_TOWER_CAP",
    "rational",
    "coerce",
    "tower_of",
    "common_tower",
    "is_zero",
    "is_rational",
    "to_rational",
    "lower",
    "sort_key",
    "format_elem",
    "adjoin_root",
    "sqrt_in_field",
    "is_square",
    "real_sign",
    "is_real",
    "exact_sum",
    "split_roots",
]

DEFAULT_TOWER_CAP = 8


class UndeterminedError(Exception):
    """A question that exact arithmetic in the current tower cannot settle."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class ReducibleError(ValueError):
    def __init__(self, message: str, factor):
        super().__init__(message)
        self.factor = factor


class TowerLimitError(UndeterminedError):
    pass


def rational(value) -> mpq:
    """Coerce int, str ("p/q"), Fraction or mpq to an mpq."""
    if isinstance(value, type(mpq())):
        return value
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, (int, str)):
        return mpq(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


_MPQ = type(mpq())


class Tower:
    """One level of a tower ``base[t]/(minpoly)``; ``QQ`` is the ground level."""

    __slots__ = ("base", "minpoly", "level", "rel_degree", "degree", "_hash")

    def __init__(self, base: "Tower | None", minpoly: tuple = ()):
        self.base = base
        self.minpoly = tuple(minpoly)
        if base is None:
            self.level = 0
            self.rel_degree = 1
            self.degree = 1
        else:
            self.level = base.level + 1
            self.rel_degree = len(self.minpoly) - 1
            self.degree = base.degree * self.rel_degree
        self._hash = hash((self.level, self.base, tuple(_key(c) for c in self.minpoly)))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Tower) or self.level != other.level:
            return False
        return self.base == other.base and self.minpoly == other.minpoly

    def __hash__(self):
        return self._hash

    def chain(self) -> list["Tower"]:
        """Levels from Q up to this one, inclusive."""
        out = []
        t = self
        while t is not None:
            out.append(t)
            t = t.base
        return out[::-1]

    def contains(self, other: "Tower") -> bool:
        """True if ``other`` is a level of this tower (a subfield by construction)."""
        t = self
        while t is not None:
            if t.level == other.level:
                return t == other
            t = t.base
        return False

    @property
    def generator(self) -> "AlgElem":
        if self.level == 0:
            raise ValueError("Q has no generator")
        zero = coerce(0, self.base)
        one = coerce(1, self.base)
        coeffs = [zero] * self.rel_degree
        coeffs[1] = one
        return AlgElem(self, tuple(coeffs))

    def __repr__(self):
        if self.level == 0:
            return "QQ"
        return f"Tower(level={self.level}, degree={self.degree}, minpoly={_fmt_upoly(self.minpoly, 't')})"


QQ = Tower(None)


def _key(x):
    if isinstance(x, _MPQ):
        return x
    return (x.tower.level, x.coeffs)


class AlgElem:
    __slots__ = ("tower", "coeffs")

    def __init__(self, tower: Tower, coeffs: Sequence):
        if tower.level == 0:
            raise ValueError("AlgElem needs a proper extension")
        cs = list(coeffs)
        n = tower.rel_degree
        if len(cs) > n:
            cs = _poly_mod(cs, tower.minpoly, tower.base)
        zero = coerce(0, tower.base)
        cs = [coerce(c, tower.base) for c in cs] + [zero] * (n - len(cs))
        self.tower = tower
        self.coeffs = tuple(cs)

    # -- arithmetic ------------------------------------------------------
    def _other(self, other):
        if isinstance(other, AlgElem):
            if other.tower == self.tower:
                return self, other
            t = common_tower(self.tower, other.tower)
            return coerce(self, t), coerce(other, t)
        if isinstance(other, (int, _MPQ, Fraction)) and not isinstance(other, bool):
            return self, coerce(other, self.tower)
        return None, None

    def __add__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        return AlgElem(a.tower, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return AlgElem(self.tower, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        return AlgElem(a.tower, tuple(x - y for x, y in zip(a.coeffs, b.coeffs)))

    def __rsub__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        return AlgElem(a.tower, tuple(y - x for x, y in zip(a.coeffs, b.coeffs)))

    def __mul__(self, other):
        if isinstance(other, (int, _MPQ)) and not isinstance(other, bool):
            return AlgElem(self.tower, tuple(c * other for c in self.coeffs))
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        prod = _poly_mul(list(a.coeffs), list(b.coeffs))
        return AlgElem(a.tower, _poly_mod(prod, a.tower.minpoly, a.tower.base))

    __rmul__ = __mul__

    def inverse(self) -> "AlgElem":
        if is_zero(self):
            raise ZeroDivisionError("inverse of zero in algebraic extension")
        base = self.tower.base
        s, _, g = upoly_xgcd(_strip(list(self.coeffs)), list(self.tower.minpoly))
        if len(g) != 1:
            raise ArithmeticError("minimal polynomial is not irreducible")
        ginv = _inv(g[0])
        return AlgElem(self.tower, tuple(c * ginv for c in s) if s else (coerce(0, base),))

    def __truediv__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        a, b = self._other(other)
        if a is None:
            return NotImplemented
        return b * a.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = coerce(1, self.tower)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparison ------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, AlgElem) and other.tower == self.tower:
            return self.coeffs == other.coeffs
        try:
            a, b = self._other(other)
        except IncompatibleTowers:
            return lower(self) == lower(other) if isinstance(other, AlgElem) else False
        if a is None:
            return NotImplemented
        return a.coeffs == b.coeffs

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        low = lower(self)
        if isinstance(low, _MPQ):
            return hash(low)
        return hash((low.tower, low.coeffs))

    def __bool__(self):
        return not is_zero(self)

    def __repr__(self):
        return f"AlgElem({format_elem(self)})"

    __str__ = lambda self: format_elem(self)  # noqa: E731


class IncompatibleTowers(ValueError):
    pass


# -- coercion helpers -----------------------------------------------------

def tower_of(x) -> Tower:
    return x.tower if isinstance(x, AlgElem) else QQ


def coerce(x, tower: Tower):
    """Embed ``x`` into ``tower`` (x must live in a level of it)."""
    if isinstance(x, AlgElem):
        if x.tower == tower:
            return x
        if x.tower.level < tower.level and tower.contains(x.tower):
            inner = coerce(x, tower.base)
            return AlgElem(tower, (inner,))
        low = lower(x)
        if not isinstance(low, AlgElem) or low.tower.level < x.tower.level:
            return coerce(low, tower)
        raise IncompatibleTowers(f"{x.tower!r} is not a subfield of {tower!r}")
    if isinstance(x, bool):
        raise TypeError("bool is not a field element")
    if isinstance(x, (int, Fraction, str)):
        x = rational(x)
    if not isinstance(x, _MPQ):
        raise TypeError(f"not a field element: {x!r}")
    if tower.level == 0:
        return x
    return AlgElem(tower, (coerce(x, tower.base),))


def common_tower(*towers: Tower) -> Tower:
    best = QQ
    for t in towers:
        if best.contains(t):
            continue
        if t.contains(best):
            best = t
            continue
        raise IncompatibleTowers(f"towers {best!r} and {t!r} are not nested")
    return best


def is_zero(x) -> bool:
    if isinstance(x, AlgElem):
        return all(is_zero(c) for c in x.coeffs)
    return x == 0


def lower(x):
    """Express ``x`` in the smallest level of its tower that contains it."""
    while isinstance(x, AlgElem) and all(is_zero(c) for c in x.coeffs[1:]):
        x = x.coeffs[0]
    if isinstance(x, AlgElem):
        return x
    return rational(x)


def is_rational(x) -> bool:
    return isinstance(lower(x), _MPQ)


def to_rational(x) -> mpq | None:
    low = lower(x)
    return low if isinstance(low, _MPQ) else None


def sort_key(x) -> tuple:
    """Deterministic total order key: flattened coordinates over Q."""
    if isinstance(x, AlgElem):
        out: list = [x.tower.level]
        for c in x.coeffs:
            out.extend(sort_key(c)[1:])
        return tuple(out)
    return (0, rational(x))


def _gen_name(level: int) -> str:
    return f"a{level}"


def format_elem(x) -> str:
    if not isinstance(x, AlgElem):
        return str(rational(x))
    parts = []
    for k, c in enumerate(x.coeffs):
        if is_zero(c):
            continue
        cs = format_elem(c)
        if isinstance(c, AlgElem) and k:
            cs = f"({cs})"
        g = _gen_name(x.tower.level)
        mono = "" if k == 0 else (g if k == 1 else f"{g}^{k}")
        if not mono:
            parts.append(cs)
        elif cs == "1":
            parts.append(mono)
        elif cs == "-1":
            parts.append("-" + mono)
        else:
            parts.append(f"{cs}*{mono}")
    if not parts:
        return "0"
    return " + ".join(parts).replace("+ -", "- ")


# -- univariate polynomials over a field (lists, low -> high) -------------

def _strip(p: list) -> list:
    while p and is_zero(p[-1]):
        p.pop()
    return p


def _inv(c):
    if isinstance(c, AlgElem):
        return c.inverse()
    if c == 0:
        raise ZeroDivisionError("division by zero")
    return 1 / rational(c)


def _poly_mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [None] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if is_zero(x):
            continue
        for j, y in enumerate(b):
            t = x * y
            out[i + j] = t if out[i + j] is None else out[i + j] + t
    return [mpq(0) if v is None else v for v in out]


def _poly_mod(p: list, m: tuple, base: Tower) -> list:
    """Reduce p modulo the monic polynomial m."""
    p = list(p)
    n = len(m) - 1
    for k in range(len(p) - 1, n - 1, -1):
        c = p[k]
        if is_zero(c):
            continue
        for i in range(n):
            p[k - n + i] = p[k - n + i] - c * m[i]
        p[k] = coerce(0, base)
    return p[:n]


def upoly_divmod(a: list, b: list) -> tuple[list, list]:
    b = _strip(list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    inv_lead = _inv(b[-1])
    q = [mpq(0)] * max(len(a) - len(b) + 1, 0)
    for k in range(len(a) - len(b), -1, -1):
        c = a[k + len(b) - 1]
        if is_zero(c):
            continue
        f = c * inv_lead
        q[k] = f
        for i, bi in enumerate(b):
            a[k + i] = a[k + i] - f * bi
    return _strip(q), _strip(a[: len(b) - 1])


def upoly_monic(p: list) -> list:
    p = _strip(list(p))
    if not p:
        return p
    inv = _inv(p[-1])
    return [c * inv for c in p]


def upoly_gcd(a: list, b: list) -> list:
    a, b = _strip(list(a)), _strip(list(b))
    while b:
        _, r = upoly_divmod(a, b)
        a, b = b, r
    return upoly_monic(a)


def upoly_xgcd(a: list, b: list) -> tuple[list, list, list]:
    """Return (s, t, g) with s*a + t*b = g = gcd(a, b) (not normalized)."""
    r0, r1 = _strip(list(a)), _strip(list(b))
    s0, s1 = [mpq(1)], []
    t0, t1 = [], [mpq(1)]
    while r1:
        q, r = upoly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, upoly_sub(s0, _poly_mul(q, s1))
        t0, t1 = t1, upoly_sub(t0, _poly_mul(q, t1))
    return s0, t0, r0


def upoly_sub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else mpq(0)
        y = b[i] if i < len(b) else mpq(0)
        out.append(x - y)
    return _strip(out)


def upoly_deriv(p: list) -> list:
    return _strip([c * k for k, c in enumerate(p)][1:])


def upoly_eval(p: list, x):
    acc = mpq(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def upoly_squarefree(p: list) -> list:
    p = _strip(list(p))
    if len(p) <= 2:
        return upoly_monic(p)
    g = upoly_gcd(p, upoly_deriv(p))
    q, _ = upoly_divmod(p, g)
    return upoly_monic(q)


def _fmt_upoly(p, var="t") -> str:
    terms = []
    for k, c in enumerate(p):
        if is_zero(c):
            continue
        cs = format_elem(c)
        if isinstance(c, AlgElem):
            cs = f"({cs})"
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        terms.append(cs if not mono else (mono if cs == "1" else f"{cs}*{mono}"))
    return " + ".join(reversed(terms)) or "0"


# -- square roots and embeddings -------------------------------------------

def _rational_sqrt(q: mpq) -> mpq | None:
    if q < 0:
        return None
    n, d = int(q.numerator), int(q.denominator)
    if gmpy2.is_square(n) and gmpy2.is_square(d):
        return mpq(int(gmpy2.isqrt(n)), int(gmpy2.isqrt(d)))
    return None


def _quadratic_data(t: Tower):
    """For a quadratic level over Q: (p, q) of t^2 + p t + q and discriminant."""
    q0, p0 = t.minpoly[0], t.minpoly[1]
    return p0, q0, p0 * p0 - 4 * q0


def _is_quadratic_over_q(t: Tower) -> bool:
    return t.level == 1 and t.rel_degree == 2


def sqrt_in_field(x):
    """A square root of ``x`` in its own tower, or None if there is none.

    Decided over Q and over quadratic extensions of Q; deeper towers raise
    :class:`UndeterminedError`.
    """
    low = lower(x)
    if isinstance(low, _MPQ):
        r = _rational_sqrt(low)
        if r is not None or not isinstance(x, AlgElem):
            return None if r is None else coerce(r, tower_of(x))
        t = x.tower
        if t.level == 1 and _is_quadratic_over_q(t):
            # sqrt(q) = c * s with s^2 = disc?
            p0, _, disc = _quadratic_data(t)
            c = _rational_sqrt(low / disc)
            if c is None:
                return None
            s = 2 * t.generator + p0  # s^2 = disc
            return s * c
        raise UndeterminedError("square-root test only implemented over Q and quadratic towers", x)
    t = low.tower
    if not _is_quadratic_over_q(t):
        raise UndeterminedError("square-root test only implemented over Q and quadratic towers", x)
    p0, _, disc = _quadratic_data(t)
    u, v = low.coeffs
    # x = A + B s with s = 2*gen + p0, s^2 = disc
    A = u - v * p0 / 2
    B = v / 2
    norm = A * A - B * B * disc
    n = _rational_sqrt(norm)
    if n is None:
        return None
    s = 2 * t.generator + p0
    for cand in ((A + n) / 2, (A - n) / 2):
        P = _rational_sqrt(cand)
        if P is not None and P != 0:
            root = s * (B / (2 * P)) + P
            if root * root == low:
                return coerce(root, tower_of(x)) if tower_of(x) != t else root
    if tower_of(x) != t:
        raise UndeterminedError("square-root test only implemented over Q and quadratic towers", x)
    return None


def is_square(x) -> bool:
    return sqrt_in_field(x) is not None


def _embedding_root(t: Tower) -> tuple[mpq, mpq, mpq]:
    """Generator of a quadratic level as (P, Q, disc): gen = P + Q*sqrt(disc)."""
    p0, _, disc = _quadratic_data(t)
    return -p0 / 2, mpq(1, 2), disc


def is_real(x) -> bool:
    low = lower(x)
    if isinstance(low, _MPQ):
        return True
    t = low.tower
    if not _is_quadratic_over_q(t):
        raise UndeterminedError("realness only decided over Q and quadratic towers", x)
    _, _, disc = _quadratic_data(t)
    if disc > 0:
        return True
    return False  # low is not rational, so it has a nonzero imaginary part


def real_sign(x) -> int:
    """Sign of ``x`` under the designated real embedding."""
    low = lower(x)
    if isinstance(low, _MPQ):
        return (low > 0) - (low < 0)
    t = low.tower
    if not _is_quadratic_over_q(t):
        raise UndeterminedError("sign only decided over Q and real quadratic towers", x)
    P, Qc, disc = _embedding_root(t)
    if disc < 0:
        raise UndeterminedError("element is not real", x)
    u, v = low.coeffs
    A = u + v * P
    B = v * Qc  # x = A + B*sqrt(disc)
    sa = (A > 0) - (A < 0)
    sb = (B > 0) - (B < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    return sa if A * A > B * B * disc else sb


# -- extensions -------------------------------------------------------------

def _to_sympy_poly(p: list):
    t = sympy.Symbol("t")
    coeffs = [sympy.Rational(int(c.numerator), int(c.denominator)) for c in (rational(lower(c)) for c in p)]
    return sympy.Poly(list(reversed(coeffs)), t, domain="QQ")


def _from_sympy_poly(P) -> list:
    out = [mpq(int(c.p), int(c.q)) for c in reversed(P.all_coeffs())]
    return out


def factor_rational(p: list) -> list[tuple[list, int]]:
    """Monic irreducible factors over Q with multiplicities."""
    P = _to_sympy_poly(p)
    _, facs = P.factor_list()
    out = [(upoly_monic(_from_sympy_poly(f)), e) for f, e in facs]
    out.sort(key=lambda fe: (len(fe[0]), [sort_key(c) for c in fe[0]]))
    return out


def _conjugate(x, t: Tower):
    """Image under the non-trivial automorphism of a quadratic level t."""
    if not isinstance(x, AlgElem) or x.tower != t:
        return x
    p0 = t.minpoly[1]
    u, v = x.coeffs
    # gen -> -p0 - gen
    return AlgElem(t, (u - v * p0, -v))


def adjoin_root(m: Sequence, base: Tower = QQ, cap: int = DEFAULT_TOWER_CAP) -> Tower:
    """Adjoin a root of the monic irreducible polynomial ``m`` (low -> high) to ``base``.

    Raises ReducibleError with a factor when m splits, TowerLimitError when the
    total degree would exceed ``cap``.
    """
    m = [coerce(c, base) for c in m]
    m = _strip(m)
    if len(m) < 3:
        raise ValueError("need a polynomial of degree at least 2")
    if not (m[-1] == 1):
        raise ValueError("minimal polynomial must be monic")
    deg = len(m) - 1
    if base.degree * deg > cap:
        raise TowerLimitError(f"tower degree {base.degree * deg} exceeds cap {cap}", m)
    if all(is_rational(c) for c in m) and base.level == 0:
        facs = factor_rational(m)
        if len(facs) > 1 or facs[0][1] > 1:
            raise ReducibleError(f"{_fmt_upoly(m)} is reducible over Q", facs[0][0])
    elif deg == 2:
        disc = m[1] * m[1] - 4 * m[0]
        r = sqrt_in_field(disc)
        if r is not None:
            root = (r - m[1]) / 2
            raise ReducibleError(f"{_fmt_upoly(m)} has a root in the base field", [-root, mpq(1)])
    else:
        roots = _roots_in_field(m, base)
        if roots:
            raise ReducibleError(f"{_fmt_upoly(m)} has a root in the base field", [-roots[0], mpq(1)])
        raise UndeterminedError("irreducibility of degree >= 3 polynomials over extensions is not decided", m)
    return Tower(base, tuple(m))


def _squarefree_int_part(n: int) -> tuple[int, int]:
    """n = k^2 * d with d squarefree when n's prime factors are small; returns (k, d)."""
    sign = -1 if n < 0 else 1
    n = abs(n)
    k = 1
    p = 2
    while p * p <= n and p < 10000:
        while n % (p * p) == 0:
            n //= p * p
            k *= p
        p += 1
    if gmpy2.is_square(n):
        k *= int(gmpy2.isqrt(n))
        n = 1
    return k, sign * n


def _roots_in_field(f: list, K: Tower) -> list:
    """Roots of f lying in K (f squarefree or not); quadratic towers and Q only."""
    f = upoly_monic([coerce(c, K) for c in f])
    if len(f) <= 1:
        return []
    if all(is_rational(c) for c in f):
        cands = []
        for g, _ in factor_rational(f):
            if len(g) == 2:
                cands.append(coerce(-g[0], K))
            elif len(g) == 3 and K.level > 0:
                r = sqrt_in_field(coerce(g[1] * g[1] - 4 * g[0], K))
                if r is not None:
                    cands.extend([(r - g[1]) / 2, (-r - g[1]) / 2])
        return _dedupe(cands)
    if not _is_quadratic_over_q(K):
        raise UndeterminedError("root finding over deep towers is not implemented", f)
    # norm polynomial f * conj(f) has rational coefficients
    fbar = [_conjugate(c, K) for c in f]
    norm = _poly_mul(f, fbar)
    norm = [lower(c) for c in norm]
    cands = [c for c in _roots_in_field(norm, K) if is_zero(upoly_eval(f, c))]
    return _dedupe(cands)


def _dedupe(xs: Iterable) -> list:
    out: list = []
    for x in xs:
        if not any(x == y for y in out):
            out.append(x)
    out.sort(key=sort_key)
    return out


def split_roots(f: list, K: Tower, cap: int = DEFAULT_TOWER_CAP) -> list:
    """All distinct roots of ``f`` (coefficients in K), each paired with its field.

    Returns a list of ``(root, tower)``.  Linear and quadratic factors are
    handled; quadratic factors without roots in K adjoin a square root.
    Anything of degree >= 3 without roots raises UndeterminedError.
    """
    f = upoly_squarefree([coerce(c, K) for c in f])
    if len(f) <= 1:
        return []
    out: list = []
    roots = _roots_in_field(f, K)
    rest = f
    for r in roots:
        out.append((r, K))
        rest, rem = upoly_divmod(rest, [-r, coerce(1, K)])
        assert not rem
    rest = upoly_monic(rest)
    if len(rest) <= 1:
        return out
    factors: list[list] = []
    if all(is_rational(c) for c in rest):
        factors = [g for g, _ in factor_rational(rest)]
    else:
        factors = [rest]
    for g in factors:
        g = [coerce(c, K) for c in g]
        if len(g) == 2:
            out.append((-g[0], K))
            continue
        if len(g) != 3:
            raise UndeterminedError(
                f"irreducible factor of degree {len(g) - 1} is not split", g
            )
        disc = g[1] * g[1] - 4 * g[0]
        r = sqrt_in_field(disc)
        if r is not None:
            out.append(((r - g[1]) / 2, K))
            out.append(((-r - g[1]) / 2, K))
            continue
        L, s = _adjoin_sqrt(disc, K, cap)
        g1 = coerce(g[1], L)
        out.append(((s - g1) / 2, L))
        out.append(((-s - g1) / 2, L))
    return out


def _adjoin_sqrt(d, K: Tower, cap: int):
    """Adjoin sqrt(d) to K; returns (L, s) with s in L and s^2 = d."""
    low = lower(d)
    if isinstance(low, _MPQ) and K.level == 0:
        num, den = int(low.numerator), int(low.denominator)
        k, sq = _squarefree_int_part(num * den)
        L = adjoin_root([mpq(-sq), mpq(0), mpq(1)], QQ, cap)
        s = L.generator * mpq(k, den)
        return L, s
    L = adjoin_root([-coerce(d, K), coerce(0, K), coerce(1, K)], K, cap)
    return L, L.generator


def exact_sum(values: Iterable):
    """Sum field elements that may live in different (possibly non-nested) towers.

    Values are grouped by tower and summed; group sums are lowered and then
    combined in a common tower.  Raises UndeterminedError when the lowered
    group sums still live in non-nested fields.
    """
    groups: dict = {}
    order: list = []
    for v in values:
        t = tower_of(v)
        if t not in groups:
            groups[t] = mpq(0)
            order.append(t)
        groups[t] = groups[t] + v
    partial = [lower(groups[t]) for t in order]
    try:
        T = common_tower(*(tower_of(p) for p in partial))
    except IncompatibleTowers as exc:
        raise UndeterminedError("sum spans non-nested extensions", partial) from exc
    total = coerce(0, T)
    for p in partial:
        total = total + coerce(p, T)
    return lower(total)
