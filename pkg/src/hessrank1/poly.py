"""Sparse exact polynomials in named symbols.

A ParamPoly is a finite sum of terms q * s1^k1 * ... * sm^km with q a
Fraction and the si Symbols.  Monomials are stored as sorted tuples of
(Symbol, exponent) pairs; no zero coefficient and no zero exponent is ever
stored, and the zero polynomial has an empty term map.

Exponents may be negative, but only for symbols registered as nonzero
(the diagonal residual groups of the higher-dimensional normal forms put
reciprocal scale factors in the map).  Division happens in exactly one
place, `solve_linear`, and only after the leading coefficient has been
certified nonzero: a nonzero rational, or a rational times a monomial in
registered symbols.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

from .symbols import Symbol

Monomial = tuple[tuple[Symbol, int], ...]
Coeffish = Union["ParamPoly", Fraction, int]

_ONE_MONO: Monomial = ()


class SolveError(ValueError):
    """A linear solve could not be certified."""


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    acc: dict[Symbol, int] = dict(m1)
    for s, k in m2:
        v = acc.get(s, 0) + k
        if v:
            acc[s] = v
        else:
            del acc[s]
    return tuple(sorted(acc.items(), key=lambda it: it[0].sort_key()))


def _mono_pow(m: Monomial, k: int) -> Monomial:
    if k == 1 or not m:
        return m
    return tuple((s, e * k) for s, e in m)


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError("expected rational, got %r" % (v,))


class ParamPoly:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        self.terms: dict[Monomial, Fraction] = dict(terms) if terms else {}

    # -- constructors ------------------------------------------------------
    @staticmethod
    def zero() -> "ParamPoly":
        return ParamPoly()

    @staticmethod
    def rational(q) -> "ParamPoly":
        q = _as_fraction(q)
        return ParamPoly({_ONE_MONO: q}) if q else ParamPoly()

    @staticmethod
    def symbol(s: Symbol, exp: int = 1) -> "ParamPoly":
        if exp == 0:
            return ParamPoly.rational(1)
        return ParamPoly({((s, exp),): Fraction(1)})

    @staticmethod
    def monomial(q, pairs: Iterable[tuple[Symbol, int]]) -> "ParamPoly":
        q = _as_fraction(q)
        if not q:
            return ParamPoly()
        mono = tuple(sorted(((s, k) for s, k in pairs if k), key=lambda it: it[0].sort_key()))
        return ParamPoly({mono: q})

    @staticmethod
    def coerce(v: Coeffish) -> "ParamPoly":
        if isinstance(v, ParamPoly):
            return v
        return ParamPoly.rational(v)

    # -- predicates --------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    def as_rational(self) -> Fraction | None:
        """The value as a Fraction if constant, else None."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and _ONE_MONO in self.terms:
            return self.terms[_ONE_MONO]
        return None

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.as_rational() == _as_fraction(other)
        if isinstance(other, ParamPoly):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other: Coeffish) -> "ParamPoly":
        other = ParamPoly.coerce(other)
        acc = dict(self.terms)
        for m, q in other.terms.items():
            v = acc.get(m, Fraction(0)) + q
            if v:
                acc[m] = v
            else:
                acc.pop(m, None)
        return ParamPoly(acc)

    __radd__ = __add__

    def __neg__(self) -> "ParamPoly":
        return ParamPoly({m: -q for m, q in self.terms.items()})

    def __sub__(self, other: Coeffish) -> "ParamPoly":
        return self + (-ParamPoly.coerce(other))

    def __rsub__(self, other: Coeffish) -> "ParamPoly":
        return ParamPoly.coerce(other) + (-self)

    def __mul__(self, other: Coeffish) -> "ParamPoly":
        other = ParamPoly.coerce(other)
        if not self.terms or not other.terms:
            return ParamPoly()
        acc: dict[Monomial, Fraction] = {}
        for m1, q1 in self.terms.items():
            for m2, q2 in other.terms.items():
                m = _mono_mul(m1, m2)
                v = acc.get(m, Fraction(0)) + q1 * q2
                if v:
                    acc[m] = v
                else:
                    acc.pop(m, None)
        return ParamPoly(acc)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "ParamPoly":
        if k < 0:
            inv = invert_monomial(self)
            if inv is None:
                raise SolveError("cannot invert %s" % self)
            return inv ** (-k)
        out = ParamPoly.rational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def scale(self, q) -> "ParamPoly":
        q = _as_fraction(q)
        if not q:
            return ParamPoly()
        return ParamPoly({m: c * q for m, c in self.terms.items()})

    # -- structure ---------------------------------------------------------
    def symbols(self) -> set[Symbol]:
        out: set[Symbol] = set()
        for m in self.terms:
            for s, _ in m:
                out.add(s)
        return out

    def symbols_of_kind(self, kind: str) -> set[Symbol]:
        return {s for s in self.symbols() if s.kind == kind}

    def degree_in(self, s: Symbol) -> int:
        d = 0
        for m in self.terms:
            for sym, k in m:
                if sym == s:
                    d = max(d, k)
        return d

    def coeff_of(self, s: Symbol, exp: int) -> "ParamPoly":
        """Coefficient polynomial of s^exp (s removed); exp=0 collects the
        s-free part."""
        acc: dict[Monomial, Fraction] = {}
        for m, q in self.terms.items():
            k = 0
            rest = []
            for sym, e in m:
                if sym == s:
                    k = e
                else:
                    rest.append((sym, e))
            if k == exp:
                acc[tuple(rest)] = q
        return ParamPoly(acc)

    def single_power(self) -> tuple[Fraction, Symbol, int] | None:
        """(q, s, k) when the poly is exactly q * s^k with k >= 1."""
        if len(self.terms) != 1:
            return None
        (m, q), = self.terms.items()
        if len(m) != 1:
            return None
        s, k = m[0]
        if k < 1:
            return None
        return (q, s, k)

    def substitute(self, assignment: Mapping[Symbol, Coeffish]) -> "ParamPoly":
        """Simultaneous substitution; exact expansion.

        A symbol carrying a negative exponent may only receive an invertible
        (single-monomial) value.
        """
        if not assignment:
            return self
        touched = False
        for m in self.terms:
            for s, _ in m:
                if s in assignment:
                    touched = True
                    break
            if touched:
                break
        if not touched:
            return self
        out = ParamPoly()
        pow_cache: dict[tuple[Symbol, int], ParamPoly] = {}
        for m, q in self.terms.items():
            piece = ParamPoly.rational(q)
            keep: list[tuple[Symbol, int]] = []
            for s, k in m:
                if s not in assignment:
                    keep.append((s, k))
                    continue
                key = (s, k)
                val = pow_cache.get(key)
                if val is None:
                    base = ParamPoly.coerce(assignment[s])
                    if k >= 0:
                        val = base ** k
                    else:
                        inv = invert_monomial(base)
                        if inv is None:
                            raise SolveError(
                                "substituting non-invertible value %s for %s^%d" % (base, s, k))
                        val = inv ** (-k)
                    pow_cache[key] = val
                piece = piece * val
            if keep:
                piece = piece * ParamPoly({tuple(keep): Fraction(1)})
            out = out + piece
        return out

    # -- rendering ---------------------------------------------------------
    def __str__(self) -> str:
        if not self.terms:
            return "0"
        def mono_key(item):
            m, _ = item
            deg = sum(abs(k) for _, k in m)
            return (deg, tuple((s.name, -k) for s, k in m))
        parts = []
        for m, q in sorted(self.terms.items(), key=mono_key):
            factors = []
            for s, k in m:
                factors.append(s.name if k == 1 else "%s^%d" % (s.name, k))
            if not factors:
                body = str(abs(q))
            else:
                mag = abs(q)
                if mag == 1:
                    body = "*".join(factors)
                else:
                    body = "*".join([str(mag)] + factors)
            if not parts:
                parts.append(body if q > 0 else "-" + body)
            else:
                parts.append(("+ " if q > 0 else "- ") + body)
        return " ".join(parts)

    __repr__ = __str__


def invert_monomial(p: ParamPoly) -> ParamPoly | None:
    """Inverse of a single-term polynomial, or None."""
    if len(p.terms) != 1:
        return None
    (m, q), = p.terms.items()
    if not q:
        return None
    return ParamPoly({tuple((s, -k) for s, k in m): 1 / q})


def certified_nonzero(p: ParamPoly, registry: set[Symbol]) -> bool:
    """True when p is visibly nonzero: a nonzero rational, or a single
    monomial whose symbols are all registered nonzero."""
    q = p.as_rational()
    if q is not None:
        return q != 0
    if len(p.terms) != 1:
        return False
    (m, c), = p.terms.items()
    return c != 0 and all(s in registry for s, _ in m)


def strip_registered(p: ParamPoly, registry: set[Symbol]) -> ParamPoly:
    """Divide out the common power of each registered symbol (a unit), so
    relative invariants and solvable parameters become visible.

    For each registered symbol the minimum exponent across terms (absence
    counting as 0) is removed; this also clears shared negative powers.
    """
    if not p.terms or not registry:
        return p
    seen: set[Symbol] = set()
    for m in p.terms:
        for s, _ in m:
            if s in registry:
                seen.add(s)
    common: dict[Symbol, int] = {}
    for s in seen:
        mexp = min(dict(m).get(s, 0) for m in p.terms)
        if mexp:
            common[s] = mexp
    if not common:
        return p
    shift = tuple(sorted(((s, -k) for s, k in common.items()), key=lambda it: it[0].sort_key()))
    return ParamPoly({_mono_mul(m, shift): q for m, q in p.terms.items()})


def solve_linear(p: ParamPoly, s: Symbol, registry: set[Symbol]) -> ParamPoly:
    """Solve p = 0 for s.  p must be degree <= 1 in s and the coefficient of
    s must be certified nonzero; raises SolveError otherwise."""
    if p.degree_in(s) > 1:
        raise SolveError("%s is nonlinear in %s" % (p, s))
    c1 = p.coeff_of(s, 1)
    if c1.is_zero:
        raise SolveError("%s does not involve %s" % (p, s))
    if not certified_nonzero(c1, registry):
        raise SolveError("coefficient %s of %s not certified nonzero" % (c1, s))
    c0 = p.coeff_of(s, 0)
    if c0.is_zero:
        return ParamPoly.zero()
    q = c1.as_rational()
    if q is not None:
        return c0.scale(-1 / q)
    inv = invert_monomial(c1)
    return c0 * inv.scale(-1)
