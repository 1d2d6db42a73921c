"""Parser and canonical printer for polynomial 1-forms.

Grammar (see docs/grammar.md)::

    form    := expr EOF
    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("+" | "-") unary | power
    power   := atom ("^" INTEGER)?
    atom    := INTEGER | VARIABLE | DIFFERENTIAL | "(" expr ")" | "d" "(" expr ")"

``d(f)`` is the exact differential of a polynomial ``f``.

Division is only allowed by a nonzero constant, which is how rational
literals ``p/q`` are written.  The result must be linear in ``dx, dy``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from gmpy2 import mpq

from .poly import OneForm, Poly2

__all__ = ["ParseError", "parse_one_form", "parse_polynomial", "format_one_form"]


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


@dataclass
class _Tok:
    kind: str  # "num", "name", "op", "end"
    value: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastindex)
        if m.group(1):
            toks.append(_Tok("num", m.group(1), start))
        elif m.group(2):
            toks.append(_Tok("name", m.group(2), start))
        else:
            op = "^" if m.group(3) == "**" else m.group(3)
            toks.append(_Tok("op", op, start))
        pos = m.end()
    toks.append(_Tok("end", "", n))
    return toks


class _Value:
    """Polynomial with an optional linear differential part: c + f dx + g dy."""

    __slots__ = ("c", "dx", "dy")

    def __init__(self, c: Poly2, dx: Poly2 | None = None, dy: Poly2 | None = None):
        self.c = c
        self.dx = dx if dx is not None else Poly2()
        self.dy = dy if dy is not None else Poly2()

    @property
    def has_diff(self) -> bool:
        return bool(self.dx) or bool(self.dy)

    def __add__(self, o):
        return _Value(self.c + o.c, self.dx + o.dx, self.dy + o.dy)

    def __neg__(self):
        return _Value(-self.c, -self.dx, -self.dy)


class _Parser:
    def __init__(self, text: str, variables: tuple[str, str], differentials: tuple[str, str] | None):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = variables
        self.differentials = differentials

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.pos, self.text)

    def parse(self) -> _Value:
        if self.tok.kind == "end":
            self.error("empty input")
        v = self.expr()
        if self.tok.kind != "end":
            self.error(f"unexpected {self.tok.value!r}")
        return v

    def expr(self) -> _Value:
        v = self.term()
        while self.tok.kind == "op" and self.tok.value in "+-":
            op = self.advance().value
            w = self.term()
            v = v + w if op == "+" else v + (-w)
        return v

    def term(self) -> _Value:
        v = self.unary()
        while self.tok.kind == "op" and self.tok.value in "*/":
            optok = self.advance()
            w = self.unary()
            if optok.value == "*":
                v = self._mul(v, w, optok)
            else:
                v = self._div(v, w, optok)
        return v

    def _mul(self, v: _Value, w: _Value, tok: _Tok) -> _Value:
        if v.has_diff and w.has_diff:
            self.error("nonlinear in differentials", tok)
        return _Value(v.c * w.c, v.dx * w.c + w.dx * v.c, v.dy * w.c + w.dy * v.c)

    def _div(self, v: _Value, w: _Value, tok: _Tok) -> _Value:
        if w.has_diff or any(k != (0, 0) for k in w.c.terms):
            self.error("division is only allowed by a constant", tok)
        d = w.c.value_at_origin()
        if d == 0:
            self.error("division by zero", tok)
        inv = 1 / d
        return _Value(v.c * inv, v.dx * inv, v.dy * inv)

    def unary(self) -> _Value:
        if self.tok.kind == "op" and self.tok.value in "+-":
            op = self.advance().value
            v = self.unary()
            return -v if op == "-" else v
        return self.power()

    def power(self) -> _Value:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.value == "^":
            optok = self.advance()
            if self.tok.kind != "num":
                self.error("exponent must be a non-negative integer literal")
            n = int(self.advance().value)
            if base.has_diff:
                if n == 1:
                    return base
                if n == 0:
                    return _Value(Poly2.const(1))
                self.error("nonlinear in differentials", optok)
            return _Value(base.c ** n)
        return base

    def atom(self) -> _Value:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return _Value(Poly2.const(mpq(int(tok.value))))
        if tok.kind == "name":
            self.advance()
            if tok.value == self.variables[0]:
                return _Value(Poly2({(1, 0): 1}))
            if tok.value == self.variables[1]:
                return _Value(Poly2({(0, 1): 1}))
            if self.differentials and tok.value == self.differentials[0]:
                return _Value(Poly2(), dx=Poly2.const(1))
            if self.differentials and tok.value == self.differentials[1]:
                return _Value(Poly2(), dy=Poly2.const(1))
            if self.differentials and tok.value == "d" and self.tok.kind == "op" and self.tok.value == "(":
                return self._exact()
            self.error(f"unknown name {tok.value!r}", tok)
        if tok.kind == "op" and tok.value == "(":
            self.advance()
            v = self.expr()
            if not (self.tok.kind == "op" and self.tok.value == ")"):
                self.error("expected ')'")
            self.advance()
            return v
        if tok.kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected {tok.value!r}")


    def _exact(self) -> _Value:
        self.advance()
        inner = self.expr()
        if not (self.tok.kind == "op" and self.tok.value == ")"):
            self.error("expected ')'")
        self.advance()
        if inner.has_diff:
            self.error("d(...) of an expression that already holds differentials")
        return _Value(Poly2(), dx=inner.c.diff_x(), dy=inner.c.diff_y())


def parse_one_form(text: str) -> OneForm:
    """Parse ``a*dx + b*dy`` style input into a canonical :class:`OneForm`."""
    v = _Parser(text, ("x", "y"), ("dx", "dy")).parse()
    if v.c:
        raise ParseError("term without a differential", 0, text)
    if not v.dx and not v.dy:
        raise ParseError("zero form", 0, text)
    return OneForm(v.dx, v.dy)


def parse_polynomial(text: str, variables: tuple[str, str] = ("x", "y")) -> Poly2:
    v = _Parser(text, variables, None).parse()
    return v.c


def format_one_form(omega: OneForm) -> str:
    parts = []
    for coef, d in ((omega.a, "dx"), (omega.b, "dy")):
        if coef:
            parts.append(f"({coef.format()})*{d}")
    return " + ".join(parts)
