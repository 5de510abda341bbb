"""Tiny arithmetic expression parser for the text formats.

Grammar (usual precedence, ^ binds tightest and is right-associative):

    expr    := product (('+'|'-') product)*
    product := unary (('*'|'/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' ['-'] digits)?
    atom    := digits | name | name '[' int (',' int)* ']' | '(' expr ')'

Division is exact and only by a rational value.  Names are resolved
through a caller-supplied function so each context decides which symbols
exist (theta, jet entries, group parameters, ...).
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional, Union

from .poly import ParamPoly

Value = Union[Fraction, ParamPoly]
Resolver = Callable[[str, Optional[tuple[int, ...]]], Value]


class ExprError(ValueError):
    pass


_PUNCT = "+-*/^()[],"


def _tokenize(text: str) -> list[str]:
    toks: list[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(text[i:j])
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(text[i:j])
            i = j
        elif ch in _PUNCT:
            toks.append(ch)
            i += 1
        else:
            raise ExprError("unexpected character %r" % ch)
    return toks


class _Parser:
    def __init__(self, toks: list[str], resolve: Resolver):
        self.toks = toks
        self.pos = 0
        self.resolve = resolve

    def peek(self) -> str | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise ExprError("unexpected end of expression")
        if expected is not None and tok != expected:
            raise ExprError("expected %r, found %r" % (expected, tok))
        self.pos += 1
        return tok

    def expr(self) -> Value:
        val = self.product()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.product()
            if op == "+":
                val = _add(val, rhs)
            else:
                val = _add(val, _mul(rhs, Fraction(-1)))
        return val

    def product(self) -> Value:
        val = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            if op == "*":
                val = _mul(val, rhs)
            else:
                q = rhs.as_rational() if isinstance(rhs, ParamPoly) else rhs
                if q is None or q == 0:
                    raise ExprError("division only by a nonzero rational, got %s" % (rhs,))
                val = _mul(val, Fraction(1) / q)
        return val

    def unary(self) -> Value:
        if self.peek() == "-":
            self.take()
            return _mul(self.unary(), Fraction(-1))
        return self.power()

    def power(self) -> Value:
        base = self.atom()
        if self.peek() != "^":
            return base
        self.take()
        neg = False
        if self.peek() == "-":
            self.take()
            neg = True
        tok = self.take()
        if not tok.isdigit():
            raise ExprError("exponent must be an integer, found %r" % tok)
        k = -int(tok) if neg else int(tok)
        if isinstance(base, ParamPoly):
            return base ** k
        if k < 0:
            if base == 0:
                raise ExprError("zero to a negative power")
            return Fraction(1) / (base ** (-k))
        return base ** k

    def atom(self) -> Value:
        tok = self.peek()
        if tok is None:
            raise ExprError("unexpected end of expression")
        if tok == "(":
            self.take()
            val = self.expr()
            self.take(")")
            return val
        if tok.isdigit():
            self.take()
            return Fraction(int(tok))
        if tok[0].isalpha() or tok[0] == "_":
            self.take()
            index: tuple[int, ...] | None = None
            if self.peek() == "[":
                self.take()
                idx = [self._int()]
                while self.peek() == ",":
                    self.take()
                    idx.append(self._int())
                self.take("]")
                index = tuple(idx)
            return self.resolve(tok, index)
        raise ExprError("unexpected token %r" % tok)

    def _int(self) -> int:
        neg = False
        if self.peek() == "-":
            self.take()
            neg = True
        tok = self.take()
        if not tok.isdigit():
            raise ExprError("expected integer, found %r" % tok)
        return -int(tok) if neg else int(tok)


def _add(a: Value, b: Value) -> Value:
    if isinstance(a, ParamPoly) or isinstance(b, ParamPoly):
        return ParamPoly.coerce(a) + ParamPoly.coerce(b)
    return a + b


def _mul(a: Value, b: Value) -> Value:
    if isinstance(a, ParamPoly) or isinstance(b, ParamPoly):
        return ParamPoly.coerce(a) * ParamPoly.coerce(b)
    return a * b


def parse_expr(text: str, resolve: Resolver) -> Value:
    p = _Parser(_tokenize(text), resolve)
    val = p.expr()
    if p.peek() is not None:
        raise ExprError("trailing input from %r" % p.peek())
    return val


def parse_jet_index(text: str) -> tuple[int, ...]:
    """F[6,1,0] or bare 6,1,0 -> (6, 1, 0)."""
    text = text.strip()
    if text.startswith("F[") and text.endswith("]"):
        text = text[2:-1]
    elif text.startswith("G[") and text.endswith("]"):
        text = text[2:-1]
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise ExprError("bad jet index %r" % text)
