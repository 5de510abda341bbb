"""Infinitesimal affine symmetries of a graphed hypersurface.

An affine field is tangent to u = F(x) when the residual

    (T0 + sum_j C_j x_j + D F) - sum_i (T_i + sum_j A_ij x_j + B_i F) dF/dx_i

vanishes identically.  The coefficient equations are linear homogeneous in
the (n+1)(n+2) field entries, with the jets of F as coefficients.

Two consumers:

* ``solve_symmetry``: F fully numeric; one exact linear solve, kernel
  basis, and the dimension at the requested and previous order (equal
  dimensions mean the count has stabilized).
* ``propagate_homogeneity``: F still symbolic during classification.  The
  translations T_1..T_n are axioms (transitivity), never solved; the
  isotropy entries are eliminated wherever a coefficient is certified
  nonzero; what remains splits per translation into constraints on the
  jets, which are forced one at a time.  A constraint with no unknowns and
  a nonzero value is a genuine obstruction and comes back as a
  contradiction witness, not an exception.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional

from .affine import VectorField, tangency_residual
from .equivalence import CoefficientEquation, NormalizationState
from .poly import ParamPoly, SolveError, certified_nonzero, solve_linear
from .series import Coeff, Expo, TruncatedSeries, c_is_zero
from .symbols import (FIELD, JET, Symbol, field_solve_rank, field_sym,
                      is_translation, jet_solve_rank)


def isotropy_count(nvars: int) -> int:
    """Field entries that are not translations: (n+1)(n+2) - n."""
    return (nvars + 1) * (nvars + 2) - nvars


def build_tangency_equations(state: NormalizationState, order: int) -> list[CoefficientEquation]:
    """Raw coefficient equations of the tangency residual, |alpha| <= order.
    Needs jets through order + 1 (the derivative terms reach one higher)."""
    state.ensure_order(order + 1)
    f = state.fjets.to_series(order + 1)
    return equations_for_series(f, order)


def equations_for_series(f: TruncatedSeries, order: int) -> list[CoefficientEquation]:
    if order > f.bound - 1:
        raise SolveError("series bound %d too small for tangency order %d"
                         % (f.bound, order))
    generic = VectorField.generic_symbolic(f.nvars)
    res = tangency_residual(generic, f.truncate(order + 1))
    out = []
    for d in range(order + 1):
        for alpha in _exponents(f.nvars, d):
            out.append(CoefficientEquation(alpha, ParamPoly.coerce(res.coeff(alpha))))
    return out


# -- numeric solve -------------------------------------------------------------

def field_columns(nvars: int) -> list[Symbol]:
    """Unknown order used by the linear system: A row-major, B, C, D, T0,
    then the translations last."""
    n = nvars
    cols: list[Symbol] = []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            cols.append(field_sym("A", i, j))
    cols += [field_sym("B", i) for i in range(1, n + 1)]
    cols += [field_sym("C", j) for j in range(1, n + 1)]
    cols.append(field_sym("D"))
    cols.append(field_sym("T", 0))
    cols += [field_sym("T", i) for i in range(1, n + 1)]
    return cols


class LinearConstraintSystem:
    """Exact homogeneous system in a fixed symbol order."""

    def __init__(self, columns: list[Symbol]):
        self.columns = columns
        self.index = {s: k for k, s in enumerate(columns)}
        self.rows: list[list[Fraction]] = []
        self.row_labels: list[Expo] = []

    def add_equation(self, alpha: Expo, poly: ParamPoly) -> None:
        row = [Fraction(0)] * len(self.columns)
        for mono, q in poly.terms.items():
            if len(mono) != 1 or mono[0][1] != 1 or mono[0][0] not in self.index:
                raise SolveError("equation at %s is not linear homogeneous in the "
                                 "field entries: %s" % (alpha, poly))
            row[self.index[mono[0][0]]] += q
        self.rows.append(row)
        self.row_labels.append(alpha)

    def rank_through(self, max_order: int) -> int:
        rows = [r for r, a in zip(self.rows, self.row_labels) if sum(a) <= max_order]
        reduced, pivots = rref(rows)
        return len(pivots)

    def kernel_basis(self) -> list[list[Fraction]]:
        reduced, pivots = rref(self.rows)
        ncols = len(self.columns)
        free = [j for j in range(ncols) if j not in pivots]
        basis = []
        for f in free:
            v = [Fraction(0)] * ncols
            v[f] = Fraction(1)
            for r, p in zip(reduced, pivots):
                v[p] = -r[f]
            basis.append(v)
        return basis


def rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns the nonzero rows and their pivot
    columns, scanning columns left to right."""
    mat = [list(r) for r in rows if any(x != 0 for x in r)]
    if not mat:
        return [], []
    ncols = len(mat[0])
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        sel = None
        for i in range(r, len(mat)):
            if mat[i][col] != 0:
                sel = i
                break
        if sel is None:
            continue
        mat[r], mat[sel] = mat[sel], mat[r]
        inv = Fraction(1) / mat[r][col]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col] != 0:
                q = mat[i][col]
                mat[i] = [a - q * b for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def field_from_vector(nvars: int, columns: list[Symbol], vec: list[Fraction]) -> VectorField:
    vals = dict(zip(columns, vec))
    n = nvars
    mat = []
    trans = []
    for i in range(1, n + 1):
        row = [vals[field_sym("A", i, j)] for j in range(1, n + 1)]
        row.append(vals[field_sym("B", i)])
        mat.append(row)
        trans.append(vals[field_sym("T", i)])
    row = [vals[field_sym("C", j)] for j in range(1, n + 1)]
    row.append(vals[field_sym("D")])
    mat.append(row)
    trans.append(vals[field_sym("T", 0)])
    return VectorField(n, mat, trans)


@dataclass
class SymmetryReport:
    order: int
    dimension: int
    dimension_prev: int
    stabilized: bool
    basis: list[VectorField]

    def render(self) -> str:
        lines = ["order: %d" % self.order,
                 "dimension: %d" % self.dimension,
                 "dimension-at-previous-order: %d" % self.dimension_prev,
                 "stabilized: %s" % ("yes" if self.stabilized else "no"),
                 "basis:"]
        for f in self.basis:
            lines.append("  " + f.render())
        return "\n".join(lines) + "\n"


def solve_symmetry(f: TruncatedSeries, order: int) -> SymmetryReport:
    """Exact symmetry solve for a numeric series, through total order
    `order` (the series must be known one order further)."""
    eqs = equations_for_series(f, order)
    cols = field_columns(f.nvars)
    system = LinearConstraintSystem(cols)
    for eq in eqs:
        if not eq.trivial:
            system.add_equation(eq.alpha, eq.poly)
    ncols = len(cols)
    dim = ncols - system.rank_through(order)
    dim_prev = ncols - system.rank_through(order - 1)
    basis = [field_from_vector(f.nvars, cols, v) for v in system.kernel_basis()]
    return SymmetryReport(order, dim, dim_prev, dim == dim_prev, basis)


# -- propagation during classification ------------------------------------------

@dataclass
class SplitRequest:
    alpha: Expo
    poly: ParamPoly
    blocking: list[Symbol]


@dataclass
class ContradictionWitness:
    alpha: Expo
    t_symbol: Symbol
    value: Coeff
    conflicts: list[tuple[Symbol, Coeff, Coeff]] = dc_field(default_factory=list)

    def describe(self) -> str:
        parts = ["equation %s, coefficient %s on %s"
                 % (self.alpha, self.value, self.t_symbol.name)]
        for s, prior, required in self.conflicts:
            parts.append("%s assigned %s but required %s" % (s.name, prior, required))
        return "; ".join(parts)


@dataclass
class PropagationOutcome:
    order: int
    solved_isotropy: dict[Symbol, Coeff]
    forced_jets: dict[Symbol, Coeff]
    contradiction: Optional[ContradictionWitness]
    split_requests: list[SplitRequest]
    pending: list[tuple[Expo, Symbol, ParamPoly]]


def _subst_into(d: dict, mapping) -> None:
    for k in list(d):
        v = d[k]
        if isinstance(v, ParamPoly):
            v = v.substitute(mapping)
            q = v.as_rational()
            d[k] = q if q is not None else v


def propagate_homogeneity(state: NormalizationState,
                          field_solutions: dict[Symbol, Coeff],
                          order: int) -> PropagationOutcome:
    """One homogeneity pass at `order`.

    Rebuilds all tangency equations |alpha| <= order (so constraints left
    unresolved at lower orders come back on their own), eliminates isotropy
    entries, splits the remainder per translation, and forces jets until
    nothing moves or a contradiction surfaces.
    """
    n = state.n
    registry = state.registry
    # jets pinned since the last pass must land in stored solutions too
    _subst_into(field_solutions, state.assignments)
    eqs = build_tangency_equations(state, order)

    def renumeric(v):
        if isinstance(v, ParamPoly):
            q = v.as_rational()
            return q if q is not None else v
        return v

    work: list[tuple[Expo, ParamPoly]] = []
    fsol = {s: ParamPoly.coerce(v) for s, v in field_solutions.items()}
    for eq in eqs:
        p = eq.poly.substitute(fsol)
        if not p.is_zero:
            work.append((eq.alpha, p))
    work.sort(key=lambda it: (sum(it[0]), it[0]), reverse=True)

    solved_now: dict[Symbol, Coeff] = {}

    # phase 1: eliminate isotropy entries wherever certified; substitutions
    # land immediately, so the scan always reads current polys
    moved = True
    while moved:
        moved = False
        i = 0
        while i < len(work):
            alpha, p = work[i]
            candidates = []
            if not p.is_zero:
                for s in p.symbols_of_kind(FIELD):
                    if is_translation(s, n) or p.degree_in(s) != 1:
                        continue
                    if certified_nonzero(p.coeff_of(s, 1), registry):
                        candidates.append(s)
            if not candidates:
                i += 1
                continue
            s = max(candidates, key=field_solve_rank)
            sol = solve_linear(p, s, registry)
            mapping = {s: sol}
            field_solutions[s] = renumeric(sol)
            solved_now[s] = field_solutions[s]
            _subst_into(field_solutions, mapping)
            _subst_into(solved_now, mapping)
            work = [(a, q.substitute(mapping)) for a, q in work]
            moved = True

    # phase 2: split the leftovers per translation
    split_requests: list[SplitRequest] = []
    constraints: list[tuple[Expo, Symbol, ParamPoly]] = []
    for alpha, p in work:
        if p.is_zero:
            continue
        isotropy = [s for s in p.symbols_of_kind(FIELD) if not is_translation(s, n)]
        if isotropy:
            blocking: list[Symbol] = []
            for s in isotropy:
                for exp in range(1, p.degree_in(s) + 1):
                    blocking += [b for b in p.coeff_of(s, exp).symbols_of_kind(JET)
                                 if b not in blocking]
            split_requests.append(SplitRequest(alpha, p, blocking))
            continue
        leftover = p
        for i in range(1, n + 1):
            t = field_sym("T", i)
            ci = p.coeff_of(t, 1)
            if ci.is_zero:
                continue
            constraints.append((alpha, t, ci))
            leftover = leftover - ci * ParamPoly.symbol(t)
        if not leftover.is_zero:
            raise SolveError("tangency equation at %s is not homogeneous in the "
                             "field entries: %s" % (alpha, leftover))

    pristine = [(alpha, t, p) for alpha, t, p in constraints]
    forced: dict[Symbol, Coeff] = {}
    contradiction: Optional[ContradictionWitness] = None

    def force(sym: Symbol, value) -> None:
        value = renumeric(ParamPoly.coerce(value))
        state.pin_forced_jet(sym, value)
        mapping = {sym: value}
        _subst_into(field_solutions, mapping)
        _subst_into(solved_now, mapping)
        _subst_into(forced, mapping)
        forced[sym] = renumeric(ParamPoly.coerce(value))
        nonlocal constraints
        constraints = [(a, t, p.substitute(mapping)) for a, t, p in constraints]

    # phase 3: force jets, one per loop, contradictions first
    while contradiction is None:
        hit = None
        for alpha, t, p in constraints:
            if not p.is_zero and certified_nonzero(p, registry):
                hit = (alpha, t, p)
                break
        if hit is not None:
            alpha, t, p = hit
            conflicts = []
            for palpha, pt, pp in pristine:
                if (palpha, pt) != (alpha, t):
                    continue
                for s in sorted(pp.symbols_of_kind(JET), key=lambda s: s.sort_key()):
                    if s not in state.assignments:
                        continue
                    others = {k: v for k, v in state.assignments.items() if k != s}
                    resolved = pp.substitute(others)
                    if resolved.degree_in(s) != 1:
                        continue
                    if not certified_nonzero(resolved.coeff_of(s, 1), registry):
                        continue
                    required = renumeric(solve_linear(resolved, s, registry))
                    prior = state.assignments[s]
                    if not _coeff_equal(required, prior):
                        conflicts.append((s, prior, required))
            contradiction = ContradictionWitness(alpha, t, renumeric(p), conflicts)
            break

        action = None
        for alpha, t, p in constraints:
            if p.is_zero:
                continue
            power = p.single_power()
            if power is not None and power[1].kind == JET and power[1] not in registry:
                action = ("zero", power[1])
                break
        if action is None:
            best = None
            for alpha, t, p in constraints:
                if p.is_zero:
                    continue
                for s in p.symbols_of_kind(JET):
                    if s in registry or p.degree_in(s) != 1:
                        continue
                    if not certified_nonzero(p.coeff_of(s, 1), registry):
                        continue
                    if best is None or jet_solve_rank(s) > jet_solve_rank(best[1]):
                        best = (alpha, s, p)
            if best is not None:
                action = ("solve", best[1], best[2])
        if action is None:
            break
        if action[0] == "zero":
            force(action[1], Fraction(0))
        else:
            _, s, p = action
            force(s, solve_linear(p, s, registry))

    pending = [(a, t, p) for a, t, p in constraints if not p.is_zero]
    return PropagationOutcome(order, solved_now, forced, contradiction,
                              split_requests, pending)


def _coeff_equal(a: Coeff, b: Coeff) -> bool:
    if isinstance(a, ParamPoly) or isinstance(b, ParamPoly):
        return ParamPoly.coerce(a) == ParamPoly.coerce(b)
    return a == b


def _exponents(nvars: int, total: int):
    if nvars == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _exponents(nvars - 1, total - head):
            yield (head,) + rest
