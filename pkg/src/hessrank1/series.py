"""Truncated multivariate power series with exact coefficients.

A TruncatedSeries is known through a total-degree bound N: terms of degree
<= N are stored sparsely (exponent tuple -> coefficient), anything beyond
is unknown, not zero.  Coefficients are Fractions or ParamPolys; the two
mix freely (a rational is a constant polynomial).

Operations track the bound pessimistically: products and sums keep the
minimum of the operand bounds, differentiation lowers it by one, division
by a monomial lowers it by the monomial degree.

The companion JetTable stores factorial-normalized coefficients
F_alpha = (prod alpha_i!) * (raw coefficient), the natural scaling for the
order-by-order solvers.
"""
from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Callable, Mapping, Sequence, Union

from .poly import ParamPoly
from .symbols import Symbol

Expo = tuple[int, ...]
Coeff = Union[Fraction, ParamPoly]


def c_is_zero(c: Coeff) -> bool:
    if isinstance(c, ParamPoly):
        return c.is_zero
    return c == 0


def c_add(a: Coeff, b: Coeff) -> Coeff:
    if isinstance(a, ParamPoly) or isinstance(b, ParamPoly):
        return ParamPoly.coerce(a) + ParamPoly.coerce(b)
    return a + b


def c_mul(a: Coeff, b: Coeff) -> Coeff:
    if isinstance(a, ParamPoly) or isinstance(b, ParamPoly):
        return ParamPoly.coerce(a) * ParamPoly.coerce(b)
    return a * b


def c_eq(a: Coeff, b: Coeff) -> bool:
    if isinstance(a, ParamPoly) or isinstance(b, ParamPoly):
        return ParamPoly.coerce(a) == ParamPoly.coerce(b)
    return a == b


def factorial_prod(alpha: Expo) -> int:
    out = 1
    for a in alpha:
        out *= factorial(a)
    return out


class SeriesError(ValueError):
    pass


class TruncatedSeries:
    __slots__ = ("nvars", "bound", "terms")

    def __init__(self, nvars: int, bound: int, terms: Mapping[Expo, Coeff] | None = None):
        self.nvars = nvars
        self.bound = bound
        self.terms: dict[Expo, Coeff] = {}
        if terms:
            for e, c in terms.items():
                if sum(e) > bound:
                    raise SeriesError("term %s beyond bound %d" % (e, bound))
                if not c_is_zero(c):
                    self.terms[tuple(e)] = c

    # -- constructors ------------------------------------------------------
    @staticmethod
    def zero(nvars: int, bound: int) -> "TruncatedSeries":
        return TruncatedSeries(nvars, bound)

    @staticmethod
    def constant(nvars: int, bound: int, c: Coeff) -> "TruncatedSeries":
        return TruncatedSeries(nvars, bound, {(0,) * nvars: c})

    @staticmethod
    def monomial(nvars: int, bound: int, expo: Expo, c: Coeff = Fraction(1)) -> "TruncatedSeries":
        return TruncatedSeries(nvars, bound, {tuple(expo): c})

    @staticmethod
    def variable(nvars: int, bound: int, i: int) -> "TruncatedSeries":
        e = [0] * nvars
        e[i] = 1
        return TruncatedSeries(nvars, bound, {tuple(e): Fraction(1)})

    # -- basics --------------------------------------------------------------
    def coeff(self, alpha: Expo) -> Coeff:
        if sum(alpha) > self.bound:
            raise SeriesError("coefficient %s beyond bound %d" % (alpha, self.bound))
        return self.terms.get(tuple(alpha), Fraction(0))

    def jet_coeff(self, alpha: Expo) -> Coeff:
        """Factorial-normalized coefficient F_alpha."""
        return c_mul(self.coeff(alpha), Fraction(factorial_prod(alpha)))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if self.nvars != other.nvars or self.bound != other.bound:
            return False
        return self.eq_through(other, min(self.bound, other.bound))

    def __hash__(self):
        raise TypeError("unhashable")

    def eq_through(self, other: "TruncatedSeries", order: int) -> bool:
        keys = set(self.terms) | set(other.terms)
        for e in keys:
            if sum(e) > order:
                continue
            if not c_eq(self.terms.get(e, Fraction(0)), other.terms.get(e, Fraction(0))):
                return False
        return True

    def truncate(self, bound: int) -> "TruncatedSeries":
        if bound >= self.bound:
            return TruncatedSeries(self.nvars, min(bound, self.bound), self.terms)
        return TruncatedSeries(self.nvars, bound,
                               {e: c for e, c in self.terms.items() if sum(e) <= bound})

    # -- ring operations -----------------------------------------------------
    def _check_compat(self, other: "TruncatedSeries"):
        if self.nvars != other.nvars:
            raise SeriesError("variable count mismatch: %d vs %d" % (self.nvars, other.nvars))

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_compat(other)
        bound = min(self.bound, other.bound)
        acc: dict[Expo, Coeff] = {e: c for e, c in self.terms.items() if sum(e) <= bound}
        for e, c in other.terms.items():
            if sum(e) > bound:
                continue
            v = c_add(acc.get(e, Fraction(0)), c)
            if c_is_zero(v):
                acc.pop(e, None)
            else:
                acc[e] = v
        return TruncatedSeries(self.nvars, bound, acc)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(self.nvars, self.bound,
                               {e: c_mul(c, Fraction(-1)) for e, c in self.terms.items()})

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + (-other)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_compat(other)
        bound = min(self.bound, other.bound)
        acc: dict[Expo, Coeff] = {}
        items2 = [(e, sum(e), c) for e, c in other.terms.items()]
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            if d1 > bound:
                continue
            for e2, d2, c2 in items2:
                if d1 + d2 > bound:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                v = c_add(acc.get(e, Fraction(0)), c_mul(c1, c2))
                if c_is_zero(v):
                    acc.pop(e, None)
                else:
                    acc[e] = v
        return TruncatedSeries(self.nvars, bound, acc)

    def scale(self, c: Coeff) -> "TruncatedSeries":
        if c_is_zero(c):
            return TruncatedSeries.zero(self.nvars, self.bound)
        return TruncatedSeries(self.nvars, self.bound,
                               {e: c_mul(v, c) for e, v in self.terms.items()})

    def pow_int(self, k: int) -> "TruncatedSeries":
        if k < 0:
            raise SeriesError("negative integer power")
        out = TruncatedSeries.constant(self.nvars, self.bound, Fraction(1))
        for _ in range(k):
            out = out * self
        return out

    # -- calculus ------------------------------------------------------------
    def diff(self, var: int) -> "TruncatedSeries":
        if not (0 <= var < self.nvars):
            raise SeriesError("variable index %d out of range" % var)
        acc: dict[Expo, Coeff] = {}
        for e, c in self.terms.items():
            k = e[var]
            if not k:
                continue
            e2 = list(e)
            e2[var] = k - 1
            acc[tuple(e2)] = c_mul(c, Fraction(k))
        return TruncatedSeries(self.nvars, self.bound - 1, acc)

    def compose(self, inners: Sequence["TruncatedSeries"]) -> "TruncatedSeries":
        """Substitute inners[i] for variable i.  Every inner series must have
        zero constant term (composition at a shifted base point is not
        supported) and all inners share nvars and bound."""
        if len(inners) != self.nvars:
            raise SeriesError("expected %d inner series, got %d" % (self.nvars, len(inners)))
        if not inners:
            raise SeriesError("composition needs at least one variable")
        nv = inners[0].nvars
        bound = min([s.bound for s in inners] + [self.bound])
        for s in inners:
            if s.nvars != nv:
                raise SeriesError("inner series variable counts differ")
            const = s.terms.get((0,) * nv)
            if const is not None and not c_is_zero(const):
                raise SeriesError("inner series has nonzero constant term %s" % (const,))
        one = TruncatedSeries.constant(nv, bound, Fraction(1))
        pow_cache: list[dict[int, TruncatedSeries]] = [{0: one} for _ in inners]

        def ipow(i: int, k: int) -> TruncatedSeries:
            cache = pow_cache[i]
            if k in cache:
                return cache[k]
            prev = ipow(i, k - 1)
            val = prev * inners[i].truncate(bound)
            cache[k] = val
            return val

        acc = TruncatedSeries.zero(nv, bound)
        for e, c in self.terms.items():
            if sum(e) > bound:
                continue
            piece = one
            for i, k in enumerate(e):
                if k:
                    piece = piece * ipow(i, k)
            acc = acc + piece.scale(c)
        return acc

    def pow_rational(self, p: Fraction) -> "TruncatedSeries":
        """(1 + t)^p as a binomial series; requires constant term exactly 1."""
        const = self.terms.get((0,) * self.nvars, Fraction(0))
        if not c_eq(const, Fraction(1)):
            raise SeriesError("pow_rational needs constant term 1, got %s" % (const,))
        p = Fraction(p)
        t = self - TruncatedSeries.constant(self.nvars, self.bound, Fraction(1))
        out = TruncatedSeries.constant(self.nvars, self.bound, Fraction(1))
        term = TruncatedSeries.constant(self.nvars, self.bound, Fraction(1))
        coef = Fraction(1)
        for k in range(1, self.bound + 1):
            coef = coef * (p - (k - 1)) / k
            term = term * t
            if term.is_zero:
                break
            out = out + term.scale(coef)
        return out

    def divide_monomial(self, divisor: Expo) -> "TruncatedSeries":
        """Exact quotient by x^divisor; every stored term must be divisible,
        otherwise the offending monomial is reported."""
        d = sum(divisor)
        acc: dict[Expo, Coeff] = {}
        for e, c in self.terms.items():
            q = tuple(a - b for a, b in zip(e, divisor))
            if any(x < 0 for x in q):
                raise SeriesError("monomial %s not divisible by %s" % (e, divisor))
            acc[q] = c
        return TruncatedSeries(self.nvars, self.bound - d, acc)

    def substitute_coeffs(self, assignment) -> "TruncatedSeries":
        """Apply a symbol substitution to every coefficient."""
        acc: dict[Expo, Coeff] = {}
        for e, c in self.terms.items():
            if isinstance(c, ParamPoly):
                c = c.substitute(assignment)
                q = c.as_rational()
                if q is not None:
                    c = q
            if not c_is_zero(c):
                acc[e] = c
        return TruncatedSeries(self.nvars, self.bound, acc)

    # -- rendering -----------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda item: (sum(item[0]), item[0]))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = var_names(self.nvars)
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                (names[i] if k == 1 else "%s^%d" % (names[i], k))
                for i, k in enumerate(e) if k)
            cs = str(c) if not isinstance(c, ParamPoly) else "(%s)" % c
            parts.append(cs + ("*" + mono if mono else ""))
        return " + ".join(parts) + " + O(%d)" % (self.bound + 1)

    __repr__ = __str__


def var_names(nvars: int) -> list[str]:
    """Base-variable names; the graph variable u is always separate."""
    if nvars <= 4:
        return ["x", "y", "z", "w"][:nvars]
    return ["x%d" % (i + 1) for i in range(nvars)]


class JetTable:
    """Factorial-normalized coefficients of a graphing function."""

    __slots__ = ("nvars", "bound", "entries")

    def __init__(self, nvars: int, bound: int, entries: Mapping[Expo, Coeff] | None = None):
        self.nvars = nvars
        self.bound = bound
        self.entries: dict[Expo, Coeff] = dict(entries) if entries else {}

    def copy(self) -> "JetTable":
        return JetTable(self.nvars, self.bound, self.entries)

    def get(self, alpha: Expo) -> Coeff:
        return self.entries.get(tuple(alpha), Fraction(0))

    def set(self, alpha: Expo, value: Coeff):
        self.entries[tuple(alpha)] = value

    def to_series(self, bound: int | None = None) -> TruncatedSeries:
        b = self.bound if bound is None else bound
        if b > self.bound:
            raise SeriesError("jet only known through order %d" % self.bound)
        acc: dict[Expo, Coeff] = {}
        for e, v in self.entries.items():
            if sum(e) > b or c_is_zero(v):
                continue
            acc[e] = c_mul(v, Fraction(1, factorial_prod(e)))
        return TruncatedSeries(self.nvars, b, acc)

    @staticmethod
    def from_series(s: TruncatedSeries) -> "JetTable":
        acc: dict[Expo, Coeff] = {}
        for e, c in s.terms.items():
            acc[e] = c_mul(c, Fraction(factorial_prod(e)))
        return JetTable(s.nvars, s.bound, acc)

    def substitute(self, assignment):
        for e in list(self.entries):
            v = self.entries[e]
            if isinstance(v, ParamPoly):
                v = v.substitute(assignment)
                q = v.as_rational()
                self.entries[e] = q if q is not None else v


def jet_of(s: TruncatedSeries) -> JetTable:
    return JetTable.from_series(s)


# -- series text format ------------------------------------------------------
#
#   vars=<k> bound=<N>
#   e1 e2 ... ek : p/q
#
# one line per term, graded-lexicographic order, '#' comments and blank
# lines tolerated.  A coefficient may also be a single monomial in a named
# parameter, e.g. "1/5040*theta" (parametric model files).

def render_coeff(c: Coeff) -> str:
    if isinstance(c, ParamPoly):
        q = c.as_rational()
        if q is not None:
            return str(q)
        if len(c.terms) != 1:
            raise SeriesError("coefficient %s is not a single monomial" % (c,))
        (m, q), = c.terms.items()
        parts = [str(q)]
        for s, k in m:
            parts.append(s.name if k == 1 else "%s^%d" % (s.name, k))
        return "*".join(parts)
    return str(c)


def parse_coeff(text: str, env: Mapping[str, Symbol] | None = None) -> Coeff:
    text = text.strip()
    factors = text.split("*")
    try:
        q = Fraction(factors[0])
    except ValueError:
        raise SeriesError("bad coefficient %r" % text)
    if len(factors) == 1:
        return q
    pairs = []
    for f in factors[1:]:
        name, _, exp = f.partition("^")
        name = name.strip()
        if env is None or name not in env:
            raise SeriesError("unknown parameter %r in coefficient" % name)
        pairs.append((env[name], int(exp) if exp else 1))
    return ParamPoly.monomial(q, pairs)


def write_series(s: TruncatedSeries) -> str:
    lines = ["vars=%d bound=%d" % (s.nvars, s.bound)]
    for e, c in s.sorted_terms():
        lines.append("%s : %s" % (" ".join(str(k) for k in e), render_coeff(c)))
    return "\n".join(lines) + "\n"


def read_series(text: str, env: Mapping[str, Symbol] | None = None) -> TruncatedSeries:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise SeriesError("empty series text")
    header = lines[0].replace("=", " ").split()
    if len(header) != 4 or header[0] != "vars" or header[2] != "bound":
        raise SeriesError("bad header %r" % lines[0])
    nvars, bound = int(header[1]), int(header[3])
    terms: dict[Expo, Coeff] = {}
    for ln in lines[1:]:
        left, sep, right = ln.partition(":")
        if not sep:
            raise SeriesError("bad term line %r" % ln)
        e = tuple(int(tok) for tok in left.split())
        if len(e) != nvars:
            raise SeriesError("term %r has %d exponents, expected %d" % (ln, len(e), nvars))
        terms[e] = parse_coeff(right, env)
    return TruncatedSeries(nvars, bound, terms)
