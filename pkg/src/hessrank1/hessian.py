"""Hessian rank-1 test and shape completion for graphed hypersurfaces.

The surface is u = F(x_1..x_n) with F starting at the quadric x_1^2/2,
so the (1,1) Hessian entry is a unit.  Rank <= 1 is then equivalent to
the vanishing of the (n-1)^2 minors

    M_vw = F_{x x} * F_{v w} - F_{x v} * F_{x w}

with v, w running over the non-leading variables (x = x_1 throughout).

The same minors drive completion: coefficients whose exponent has
non-leading degree >= 2 are forced, one per minor coefficient, in a
triangular order (total degree ascending, then non-leading degree
ascending).  The unknown always enters through the constant term of
F_{x x}, with a positive integer multiplier, so the recursion never
divides by anything that could vanish.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .poly import ParamPoly
from .series import (Coeff, Expo, JetTable, SeriesError, TruncatedSeries,
                     c_add, c_eq, c_is_zero, c_mul, factorial_prod, var_names)


def hessian_matrix(s: TruncatedSeries) -> list[list[TruncatedSeries]]:
    n = s.nvars
    firsts = [s.diff(i) for i in range(n)]
    return [[firsts[i].diff(j) for j in range(n)] for i in range(n)]


@dataclass
class HessianReport:
    rank1: bool
    checked_through: int
    failing_pair: Optional[tuple[str, str]] = None
    failing_monomial: Optional[Expo] = None

    def render(self) -> str:
        lines = ["rank1: %s" % ("yes" if self.rank1 else "no"),
                 "checked-through-order: %d" % self.checked_through]
        if not self.rank1:
            v, w = self.failing_pair
            mono = " ".join(str(k) for k in self.failing_monomial)
            lines.append("failing-minor: (%s,%s) at monomial %s" % (v, w, mono))
        return "\n".join(lines) + "\n"


def check_hessian_rank1(s: TruncatedSeries) -> HessianReport:
    n = s.nvars
    checked = s.bound - 2
    if n == 1:
        return HessianReport(True, checked)
    h = hessian_matrix(s)
    names = var_names(n)
    for v in range(1, n):
        for w in range(1, n):
            minor = h[0][0] * h[v][w] - h[0][v] * h[0][w]
            bad = [e for e, c in minor.terms.items() if not c_is_zero(c)]
            if bad:
                first = min(bad, key=lambda e: (sum(e), e))
                return HessianReport(False, checked, (names[v], names[w]), first)
    return HessianReport(True, checked)


def is_free_shape(alpha: Expo) -> bool:
    """Exponents the minor equations never determine: non-leading degree <= 1."""
    return sum(alpha[1:]) <= 1


class CompletionMismatch(SeriesError):
    def __init__(self, alpha: Expo, supplied: Coeff, computed: Coeff):
        self.alpha = alpha
        self.supplied = supplied
        self.computed = computed
        super().__init__("completion conflict at %s: table has %s, minors force %s"
                         % (alpha, supplied, computed))


def _exponents(nvars: int, total: int):
    if nvars == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _exponents(nvars - 1, total - head):
            yield (head,) + rest


def _conv_at(a: dict[Expo, Coeff], b: dict[Expo, Coeff], gamma: Expo) -> Coeff:
    """Coefficient of x^gamma in the product of two sparse tables."""
    out: Coeff = Fraction(0)
    for beta, ca in a.items():
        delta = tuple(g - bb for g, bb in zip(gamma, beta))
        if any(x < 0 for x in delta):
            continue
        cb = b.get(delta)
        if cb is None:
            continue
        out = c_add(out, c_mul(ca, cb))
    return out


def rank1_complete(jets: JetTable, bound: int,
                   on_free: Callable[[Expo], Coeff] | None = None,
                   verify: bool = True) -> JetTable:
    """Fill a jet table out to total order `bound` using the rank-1 minors.

    Free-shape entries absent from the table are requested from `on_free`
    (default: zero).  Entries outside the free shape are forced; a supplied
    value disagreeing with the forced one raises CompletionMismatch unless
    verify is False, in which case the forced value wins.
    """
    n = jets.nvars
    out = JetTable(n, max(bound, jets.bound), dict(jets.entries))
    two_x = (2,) + (0,) * (n - 1)
    lead = out.entries.get(two_x)
    if lead is None or not c_eq(lead, Fraction(1)):
        raise SeriesError("completion expects jet %s = 1, found %s" % (two_x, lead))

    for d in range(0, bound + 1):
        for alpha in _exponents(n, d):
            if is_free_shape(alpha) and alpha not in out.entries:
                out.entries[alpha] = on_free(alpha) if on_free else Fraction(0)

    # raw (Taylor) coefficients drive the minor arithmetic
    raw: dict[Expo, Coeff] = {}
    for e, val in out.entries.items():
        if sum(e) <= bound and not c_is_zero(val):
            raw[e] = c_mul(val, Fraction(1, factorial_prod(e)))

    def deriv_table(i: int, j: int, through: int) -> dict[Expo, Coeff]:
        tbl: dict[Expo, Coeff] = {}
        for mu, c in raw.items():
            if mu[i] == 0 or mu[j] == 0 or (i == j and mu[i] < 2):
                continue
            delta = list(mu)
            delta[i] -= 1
            m = mu[i]
            delta[j] -= 1
            m *= delta[j] + 1
            if sum(delta) > through:
                continue
            tbl[tuple(delta)] = c_mul(c, Fraction(m))
        return tbl

    pairs = [(0, 0)] + [(0, v) for v in range(1, n)] \
        + [(v, w) for v in range(1, n) for w in range(v, n)]

    for d in range(2, bound + 1):
        for q in range(2, d + 1):
            cell = [a for a in _exponents(n, d) if sum(a[1:]) == q]
            if not cell:
                continue
            tables = {p: deriv_table(p[0], p[1], d - 2) for p in pairs}
            for alpha in cell:
                nonx = [i for i in range(1, n) if alpha[i]]
                v = nonx[0]
                w = v if alpha[v] >= 2 else nonx[1]
                gamma = list(alpha)
                gamma[v] -= 1
                gamma[w] -= 1
                gamma = tuple(gamma)
                if v == w:
                    mult = (gamma[v] + 1) * (gamma[v] + 2)
                else:
                    mult = (gamma[v] + 1) * (gamma[w] + 1)

                # alpha's own image in F_vw sits exactly at gamma; mask it
                t_vw = tables[(v, w)]
                masked = t_vw.pop(gamma, None)
                s = _conv_at(tables[(0, 0)], t_vw, gamma)
                if masked is not None:
                    t_vw[gamma] = masked
                s = c_add(s, c_mul(_conv_at(tables[(0, v)], tables[(0, w)], gamma),
                                   Fraction(-1)))
                forced_raw = c_mul(s, Fraction(-1, mult))
                forced = c_mul(forced_raw, Fraction(factorial_prod(alpha)))
                if isinstance(forced, ParamPoly):
                    fq = forced.as_rational()
                    if fq is not None:
                        forced = fq

                supplied = out.entries.get(alpha)
                if supplied is not None and verify and not c_eq(supplied, forced):
                    raise CompletionMismatch(alpha, supplied, forced)
                out.entries[alpha] = forced
                if c_is_zero(forced):
                    raw.pop(alpha, None)
                else:
                    raw[alpha] = forced_raw
    return out
