"""Order-by-order affine normalization of rank-1 graphed hypersurfaces.

Two graphs u = F(x) and u = G(x) are affinely equivalent through a linear
map when

    sum_j c_j x_j + d F(x)  =  G( a x + b F(x) )     (coefficientwise).

The solver keeps both jet tables symbolic, extracts the coefficient
equations of this identity (factorial-normalized, matching the jet
tables), and consumes them two ways:

* ``normalize``: spend one map parameter to move a single G jet to a
  chosen value, then mirror that value onto F, so the state's F is always
  the partially normalized representative.
* ``stabilize_through``: a fix-point sweep that solves every map
  parameter the equations determine, forces parameters appearing alone as
  a power to zero, and certifies invertibility by registering the symbols
  of the map determinant once it collapses to a single monomial.

Everything is exact; division only happens against certified-nonzero
leading coefficients.  A coefficient equation with no unknowns left and a
nonzero value is a bookkeeping failure and raises.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .exprparse import ExprError, parse_expr
from .hessian import is_free_shape, rank1_complete
from .poly import (ParamPoly, SolveError, certified_nonzero, invert_monomial,
                   solve_linear, strip_registered)
from .series import (Coeff, Expo, JetTable, TruncatedSeries, c_eq, c_is_zero,
                     c_mul)
from .symbols import (GROUP, JET, Symbol, branch_sym, field_sym,
                      group_solve_rank, group_sym, jet_sym)


class BookkeepingError(RuntimeError):
    """An equation that should have been satisfiable is visibly nonzero."""


def jet_name(letter: str, alpha: Expo) -> str:
    return "%s[%s]" % (letter, ",".join(str(i) for i in alpha))


def _swap_jet_letter(value: Coeff, src: str, dst: str) -> Coeff:
    """Rename every jet symbol of one letter to the other letter."""
    if not isinstance(value, ParamPoly):
        return value
    mapping = {s: ParamPoly.symbol(jet_sym(dst, s.index))
               for s in value.symbols_of_kind(JET) if s.letter == src}
    return value.substitute(mapping) if mapping else value


def _iroot(m: int, k: int) -> Optional[int]:
    if m < 0:
        return None
    if m in (0, 1):
        return m
    lo, hi = 1, 1
    while hi ** k < m:
        hi <<= 1
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** k < m:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo ** k == m else None


def rational_root(q: Fraction, k: int) -> Fraction:
    """Exact k-th root of a rational; even roots take the positive branch."""
    if k % 2 == 0 and q < 0:
        raise SolveError("even root of negative value %s" % q)
    sign = -1 if q < 0 else 1
    num = _iroot(abs(q.numerator), k)
    den = _iroot(q.denominator, k)
    if num is None or den is None:
        raise SolveError("%s is not an exact %d-th power" % (q, k))
    return Fraction(sign * num, den)


@dataclass
class CoefficientEquation:
    alpha: Expo
    poly: ParamPoly

    @property
    def trivial(self) -> bool:
        return self.poly.is_zero


class AffineMapSym:
    """The linear part of a graph-to-graph map: x -> a x + b u, u -> c x + d u."""

    __slots__ = ("nvars", "a", "b", "c", "d")

    def __init__(self, nvars: int, a, b, c, d):
        self.nvars = nvars
        self.a = [list(row) for row in a]
        self.b = list(b)
        self.c = list(c)
        self.d = d

    @staticmethod
    def generic(nvars: int) -> "AffineMapSym":
        n = nvars
        a = [[ParamPoly.symbol(group_sym("a", i, j)) for j in range(1, n + 1)]
             for i in range(1, n + 1)]
        b = [ParamPoly.symbol(group_sym("b", i)) for i in range(1, n + 1)]
        c = [ParamPoly.symbol(group_sym("c", j)) for j in range(1, n + 1)]
        d = ParamPoly.symbol(group_sym("d"))
        return AffineMapSym(n, a, b, c, d)

    @staticmethod
    def diagonal(nvars: int, powers: Iterable[int], upow: int) -> "AffineMapSym":
        """Residual scaling map diag(s^p1, ..., s^pn | s^pu) in the single
        parameter s = a[1,1]; s must be registered nonzero by the caller."""
        s = group_sym("a", 1, 1)
        powers = list(powers)
        if len(powers) != nvars:
            raise ValueError("need %d powers, got %d" % (nvars, len(powers)))
        z = Fraction(0)
        a = [[z] * nvars for _ in range(nvars)]
        for i, p in enumerate(powers):
            a[i][i] = ParamPoly.symbol(s, p) if p else Fraction(1)
        b = [z] * nvars
        c = [z] * nvars
        d = ParamPoly.symbol(s, upow) if upow else Fraction(1)
        return AffineMapSym(nvars, a, b, c, d)

    def copy(self) -> "AffineMapSym":
        return AffineMapSym(self.nvars, self.a, self.b, self.c, self.d)

    def substitute(self, assignment) -> None:
        def sub(v: Coeff) -> Coeff:
            if isinstance(v, ParamPoly):
                v = v.substitute(assignment)
                q = v.as_rational()
                return q if q is not None else v
            return v
        n = self.nvars
        self.a = [[sub(self.a[i][j]) for j in range(n)] for i in range(n)]
        self.b = [sub(v) for v in self.b]
        self.c = [sub(v) for v in self.c]
        self.d = sub(self.d)

    def symbols(self) -> set[Symbol]:
        out: set[Symbol] = set()
        for v in [e for row in self.a for e in row] + self.b + self.c + [self.d]:
            if isinstance(v, ParamPoly):
                out |= v.symbols()
        return out

    def det(self) -> ParamPoly:
        """Determinant of the full (n+1)x(n+1) block [[a, b], [c, d]]."""
        n = self.nvars
        rows: list[list[ParamPoly]] = []
        for i in range(n):
            rows.append([ParamPoly.coerce(self.a[i][j]) for j in range(n)]
                        + [ParamPoly.coerce(self.b[i])])
        rows.append([ParamPoly.coerce(self.c[j]) for j in range(n)]
                    + [ParamPoly.coerce(self.d)])

        def laplace(mat: list[list[ParamPoly]]) -> ParamPoly:
            m = len(mat)
            if m == 1:
                return mat[0][0]
            acc = ParamPoly.zero()
            for j in range(m):
                if mat[0][j].is_zero:
                    continue
                minor = [row[:j] + row[j + 1:] for row in mat[1:]]
                term = mat[0][j] * laplace(minor)
                acc = acc + (term if j % 2 == 0 else -term)
            return acc

        return laplace(rows)


@dataclass
class StabilityReport:
    order: int
    solutions: dict[Symbol, Coeff]
    pending: list[CoefficientEquation]


class NormalizationState:
    """Both jet tables, the connecting map, and all assumptions made so far.

    Replaying the assumption log against a fresh state with the same start
    data reproduces the state; everything else (completions, solved map
    parameters) is derived.
    """

    def __init__(self, nvars: int, bound: int, fjets: JetTable, gjets: JetTable,
                 gmap: AffineMapSym, registry: set[Symbol] | None = None):
        self.n = nvars
        self.bound = bound
        self.fjets = fjets
        self.gjets = gjets
        self.map = gmap
        self.registry: set[Symbol] = set(registry) if registry else set()
        self.solutions: dict[Symbol, Coeff] = {}
        self.assignments: dict[Symbol, Coeff] = {}
        self.log: list[str] = []
        self._ensured = -1

    # -- construction --------------------------------------------------------
    @staticmethod
    def start_quadric(nvars: int, bound: int) -> "NormalizationState":
        lead = (2,) + (0,) * (nvars - 1)
        f = JetTable(nvars, bound)
        g = JetTable(nvars, bound)
        for d in range(0, 3):
            for alpha in _exponents(nvars, d):
                if is_free_shape(alpha):
                    v = Fraction(1) if alpha == lead else Fraction(0)
                    f.set(alpha, v)
                    g.set(alpha, v)
        state = NormalizationState(nvars, bound, f, g, AffineMapSym.generic(nvars))
        state.ensure_order(2)
        return state

    def clone(self) -> "NormalizationState":
        out = NormalizationState(self.n, self.bound, self.fjets.copy(),
                                 self.gjets.copy(), self.map.copy(),
                                 set(self.registry))
        out.solutions = dict(self.solutions)
        out.assignments = dict(self.assignments)
        out.log = list(self.log)
        out._ensured = self._ensured
        return out

    # -- shape bookkeeping -----------------------------------------------------
    def ensure_order(self, order: int) -> None:
        if order <= self._ensured:
            return
        if order > self.bound:
            raise BookkeepingError("order %d beyond table bound %d" % (order, self.bound))

        def handler(letter):
            def on_free(alpha):
                return ParamPoly.symbol(jet_sym(letter, alpha))
            return on_free

        self.fjets = rank1_complete(self.fjets, order, on_free=handler("F"))
        self.gjets = rank1_complete(self.gjets, order, on_free=handler("G"))
        self._ensured = order

    def f_series(self, order: int) -> TruncatedSeries:
        self.ensure_order(order)
        return self.fjets.to_series(order)

    def jet_value(self, alpha: Expo) -> Coeff:
        self.ensure_order(sum(alpha))
        return self.fjets.get(alpha)

    # -- substitution ------------------------------------------------------------
    def assign(self, sym: Symbol, value) -> None:
        value = ParamPoly.coerce(value) if not isinstance(value, (Fraction, int)) else Fraction(value)
        if isinstance(value, ParamPoly):
            q = value.as_rational()
            if q is not None:
                value = q
        mapping = {sym: value}
        self.fjets.substitute(mapping)
        self.gjets.substitute(mapping)
        self.map.substitute(mapping)
        for d in (self.solutions, self.assignments):
            for s in list(d):
                v = d[s]
                if isinstance(v, ParamPoly):
                    v = v.substitute(mapping)
                    q = v.as_rational()
                    d[s] = q if q is not None else v
        if sym.kind == GROUP:
            self.solutions[sym] = value
        else:
            self.assignments[sym] = value

    # -- assumptions -------------------------------------------------------------
    def assume_nonzero(self, sym: Symbol) -> None:
        self.registry.add(sym)
        self.log.append("assume-nonzero %s" % sym.name)

    def assume_zero(self, alpha: Expo) -> None:
        """Declare a free-shape jet zero, on both sides of the map."""
        alpha = tuple(alpha)
        if not is_free_shape(alpha):
            raise BookkeepingError("assume-zero only applies to free-shape jets, not %s"
                                   % (alpha,))
        self.ensure_order(sum(alpha))
        self._pin(self.fjets, "F", alpha, Fraction(0))
        self._pin(self.gjets, "G", alpha, Fraction(0))
        self.log.append("assume-zero %s" % jet_name("F", alpha))

    def _pin(self, table: JetTable, letter: str, alpha: Expo, value: Coeff) -> None:
        cur = table.get(alpha)
        sym = jet_sym(letter, alpha)
        if isinstance(cur, ParamPoly) and cur == ParamPoly.symbol(sym):
            self.assign(sym, value)
        elif c_eq(cur, value):
            table.set(alpha, value)
        else:
            raise BookkeepingError("jet %s is already %s, cannot pin to %s"
                                   % (jet_name(letter, alpha), cur, value))

    def pin_forced_jet(self, sym: Symbol, value: Coeff) -> None:
        """Record a jet value forced by the homogeneity argument.  The
        argument applies to every surface in the branch, so the target side
        inherits the same value with its own jets substituted in."""
        self.assign(sym, value)
        if sym.letter != "F":
            return
        gval = _swap_jet_letter(value, "F", "G")
        cur = self.gjets.get(sym.index)
        gsym = jet_sym("G", sym.index)
        if isinstance(cur, ParamPoly) and cur == ParamPoly.symbol(gsym):
            self.assign(gsym, gval)
        elif not c_eq(cur, gval):
            raise BookkeepingError("forced jet %s contradicts target side: %s vs %s"
                                   % (sym.name, cur, gval))

    def declare_parameter(self, alpha: Expo, name: str) -> None:
        """Promote a still-free jet to a named branch parameter, on both
        sides of the map (the parameter names the shared family value)."""
        alpha = tuple(alpha)
        self.ensure_order(sum(alpha))
        theta = ParamPoly.symbol(branch_sym(name))
        self._pin(self.fjets, "F", alpha, theta)
        self._pin(self.gjets, "G", alpha, theta)

    # -- the map equation ----------------------------------------------------------
    def map_residual(self, order: int) -> TruncatedSeries:
        self.ensure_order(order)
        f = self.fjets.to_series(order)
        g = self.gjets.to_series(order)
        n = self.n
        inners = []
        for i in range(n):
            acc = TruncatedSeries.zero(n, order)
            for j in range(n):
                if not c_is_zero(self.map.a[i][j]):
                    acc = acc + TruncatedSeries.variable(n, order, j).scale(self.map.a[i][j])
            if not c_is_zero(self.map.b[i]):
                acc = acc + f.scale(self.map.b[i])
            inners.append(acc)
        res = g.compose(inners)
        for j in range(n):
            if not c_is_zero(self.map.c[j]):
                res = res - TruncatedSeries.variable(n, order, j).scale(self.map.c[j])
        res = res - f.scale(self.map.d)
        return res

    def build_map_equations(self, order: int) -> list[CoefficientEquation]:
        """Every coefficient equation |alpha| <= order, identically-zero ones
        included (callers can filter on .trivial)."""
        res = self.map_residual(order)
        out = []
        for d in range(order + 1):
            for alpha in _exponents(self.n, d):
                out.append(CoefficientEquation(alpha, ParamPoly.coerce(res.jet_coeff(alpha))))
        return out

    # -- normalize -------------------------------------------------------------------
    def normalize(self, alpha: Expo, value: Fraction, solve_sym: Symbol,
                  mirror: bool = True) -> None:
        """Set G at alpha to `value` by solving one map parameter, then mirror
        the value onto F so the state tracks the normalized representative."""
        alpha = tuple(alpha)
        value = Fraction(value)
        if not is_free_shape(alpha):
            raise BookkeepingError("normalize only applies to free-shape jets")
        order = sum(alpha)
        self.ensure_order(order)
        self._pin(self.gjets, "G", alpha, value)

        res = self.map_residual(order)
        eq = ParamPoly.coerce(res.jet_coeff(alpha))
        stripped = strip_registered(eq, self.registry)
        k = stripped.degree_in(solve_sym)
        if k == 0:
            raise SolveError("equation at %s does not involve %s: %s"
                             % (alpha, solve_sym.name, stripped))
        if k == 1:
            sol = solve_linear(stripped, solve_sym, self.registry)
            q = sol.as_rational()
            self.assign(solve_sym, q if q is not None else sol)
            if mirror:
                self._pin(self.fjets, "F", alpha, value)
        else:
            # c * s^k + r = 0 with nothing in between: defer the root until
            # the mirrored value lands, then extract it exactly
            for mid in range(1, k):
                if not stripped.coeff_of(solve_sym, mid).is_zero:
                    raise SolveError("equation has intermediate power of %s: %s"
                                     % (solve_sym.name, stripped))
            ck = stripped.coeff_of(solve_sym, k)
            if not certified_nonzero(ck, self.registry):
                raise SolveError("leading coefficient %s not certified nonzero" % ck)
            r = stripped.coeff_of(solve_sym, 0)
            q = ck.as_rational()
            if q is not None:
                rhs = r.scale(Fraction(-1) / q)
            else:
                rhs = r * invert_monomial(ck).scale(-1)
            if mirror:
                self._pin(self.fjets, "F", alpha, value)
                rhs = rhs.substitute({jet_sym("F", alpha): value})
            rq = rhs.as_rational()
            if rq is None:
                raise SolveError("power of %s is not yet numeric: %s^%d = %s"
                                 % (solve_sym.name, solve_sym.name, k, rhs))
            self.assign(solve_sym, rational_root(rq, k))
        self.log.append("normalize %s := %s solving %s"
                        % (jet_name("G", alpha), value, solve_sym.name))

    # -- stabilize ----------------------------------------------------------------------
    def stabilize_through(self, order: int, _log: bool = True) -> list[CoefficientEquation]:
        """Fix-point pass over all map equations through `order`: detect
        contradictions, force lone-power map parameters to zero, solve what
        is linear and certified.  Returns the equations left pending."""
        while True:
            changed = False
            pending: list[CoefficientEquation] = []
            for eq in self.build_map_equations(order):
                if eq.trivial:
                    continue
                stripped = strip_registered(eq.poly, self.registry)
                if certified_nonzero(stripped, self.registry):
                    raise BookkeepingError("map equation at %s is visibly nonzero: %s"
                                           % (eq.alpha, stripped))
                power = stripped.single_power()
                if power is not None:
                    _, s, _ = power
                    if s.kind == GROUP and s not in self.registry:
                        self.assign(s, Fraction(0))
                        changed = True
                        break
                candidates = []
                for s in stripped.symbols_of_kind(GROUP):
                    if s in self.registry or stripped.degree_in(s) != 1:
                        continue
                    if certified_nonzero(stripped.coeff_of(s, 1), self.registry):
                        candidates.append(s)
                if candidates:
                    s = max(candidates, key=group_solve_rank)
                    sol = solve_linear(stripped, s, self.registry)
                    q = sol.as_rational()
                    self.assign(s, q if q is not None else sol)
                    changed = True
                    break
                pending.append(CoefficientEquation(eq.alpha, stripped))
            if changed:
                continue
            det = self.map.det()
            registered = False
            if len(det.terms) == 1:
                for s, _ in next(iter(det.terms)):
                    if s not in self.registry:
                        self.registry.add(s)
                        registered = True
            if not registered:
                break
        if _log:
            self.log.append("stabilize-through %d" % order)
        return pending


def stability_check(state: NormalizationState, order: int) -> StabilityReport:
    """Self-equivalence constraints: identify G with F and solve the map
    equations through `order` on a clone.  The solved map parameters cut out
    the stabilizer of the current (partial) normal form."""
    clone = state.clone()
    clone.ensure_order(order)
    before = set(clone.solutions)
    for d in range(order + 1):
        for alpha in _exponents(clone.n, d):
            if not is_free_shape(alpha):
                continue
            g = clone.gjets.get(alpha)
            gs = jet_sym("G", alpha)
            if isinstance(g, ParamPoly) and g == ParamPoly.symbol(gs):
                clone.assign(gs, clone.fjets.get(alpha))
    pending = clone.stabilize_through(order, _log=False)
    new = {s: v for s, v in clone.solutions.items() if s not in before}
    return StabilityReport(order, new, pending)


# -- pre-normalized shape files ------------------------------------------------
#
#   dimension 3
#   bound 8
#   group-diagonal 1 0 -1 : 2
#   entry 2 0 0 = 1
#   entry 4 1 0 free
#   derived 6 2 0 = 12*F[6,1,0] - 30*F[6,0,0] + 20*F[4,1,0]^2
#
# Unlisted free-shape entries are zero; `derived` lines are checked against
# the completion when the state is built.

@dataclass
class PrenormData:
    nvars: int
    bound: int
    powers: list[int]
    upow: int
    values: list[tuple[Expo, Optional[str]]]   # (index, None for free, else expr text)
    derived: list[tuple[Expo, str]]


def parse_prenorm(text: str) -> PrenormData:
    nvars = bound = None
    powers: list[int] = []
    upow = 0
    values: list[tuple[Expo, Optional[str]]] = []
    derived: list[tuple[Expo, str]] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "dimension":
            nvars = int(toks[1])
        elif toks[0] == "bound":
            bound = int(toks[1])
        elif toks[0] == "group-diagonal":
            rest = line[len("group-diagonal"):].strip()
            left, sep, right = rest.partition(":")
            if not sep:
                raise ExprError("bad group-diagonal line %r" % line)
            powers = [int(t) for t in left.split()]
            upow = int(right.strip())
        elif toks[0] in ("entry", "derived"):
            rest = line[len(toks[0]):].strip()
            if toks[0] == "entry" and rest.endswith(" free"):
                idx = tuple(int(t) for t in rest[:-len(" free")].split())
                values.append((idx, None))
                continue
            left, sep, right = rest.partition("=")
            if not sep:
                raise ExprError("bad %s line %r" % (toks[0], line))
            idx = tuple(int(t) for t in left.split())
            if toks[0] == "entry":
                values.append((idx, right.strip()))
            else:
                derived.append((idx, right.strip()))
        else:
            raise ExprError("unknown prenorm directive %r" % toks[0])
    if nvars is None or bound is None:
        raise ExprError("prenorm file needs dimension and bound")
    return PrenormData(nvars, bound, powers, upow, values, derived)


def state_from_prenorm(data: PrenormData) -> NormalizationState:
    n, bound = data.nvars, data.bound

    def build(letter: str) -> JetTable:
        def resolve(name, index):
            if name == "F" and index is not None:
                return ParamPoly.symbol(jet_sym(letter, index))
            raise ExprError("unknown name %r in prenorm expression" % name)
        t = JetTable(n, bound)
        for idx, exprtext in data.values:
            if len(idx) != n:
                raise ExprError("index %s has wrong length" % (idx,))
            if exprtext is None:
                t.set(idx, ParamPoly.symbol(jet_sym(letter, idx)))
            else:
                t.set(idx, parse_expr(exprtext, resolve))
        for idx, exprtext in data.derived:
            t.set(idx, parse_expr(exprtext, resolve))
        # a prenormalized form is exhaustive: unlisted coefficients vanish
        for d in range(0, bound + 1):
            for idx in _exponents(n, d):
                if is_free_shape(idx) and idx not in t.entries:
                    t.set(idx, Fraction(0))
        return t

    if data.powers:
        gmap = AffineMapSym.diagonal(n, data.powers, data.upow)
        registry = {group_sym("a", 1, 1)}
    else:
        gmap = AffineMapSym.generic(n)
        registry = set()
    state = NormalizationState(n, bound, build("F"), build("G"), gmap, registry)
    state.ensure_order(2)
    return state


# -- assumption-log replay -------------------------------------------------------

def parse_log_symbol(name: str) -> Symbol:
    letter, _, rest = name.partition("[")
    if rest:
        index = tuple(int(t) for t in rest.rstrip("]").split(","))
    else:
        index = ()
    if letter in ("F", "G"):
        return jet_sym(letter, index)
    if letter in ("A", "B", "C", "D", "T"):
        return field_sym(letter, *index)
    if letter and letter[0] in "abcd":
        return group_sym(letter, *index)
    raise ExprError("cannot classify symbol %r in log" % name)


def replay_line(state: NormalizationState, line: str) -> None:
    toks = line.split()
    if toks[0] == "assume-nonzero":
        state.assume_nonzero(parse_log_symbol(toks[1]))
    elif toks[0] == "assume-zero":
        state.assume_zero(parse_log_symbol(toks[1]).index)
    elif toks[0] == "stabilize-through":
        state.stabilize_through(int(toks[1]))
    elif toks[0] == "normalize":
        # normalize G[i,j] := q solving sym
        target = parse_log_symbol(toks[1])
        if toks[2] != ":=" or toks[4] != "solving":
            raise ExprError("malformed normalize line %r" % line)
        state.normalize(target.index, Fraction(toks[3]), parse_log_symbol(toks[5]))
    else:
        raise ExprError("unknown log line %r" % line)


def _exponents(nvars: int, total: int):
    if nvars == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _exponents(nvars - 1, total - head):
            yield (head,) + rest
