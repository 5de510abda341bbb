"""Affine vector fields on the ambient space of a graphed hypersurface.

Ambient coordinates are (x_1..x_n, u), with u the graph direction, kept
last throughout.  A field is

    L = sum_i (t_i + sum_j m_ij X_j) d/dX_i

stored as the (n+1)x(n+1) matrix m and the translation vector t.  Entries
are exact: Fractions, or ParamPolys when the field still carries unsolved
parameters.

For two fields written this way the bracket [L1, L2] has matrix
M2*M1 - M1*M2 and translation M2*t1 - M1*t2 (fields act as derivations,
so the coefficient matrices compose in reverse).
"""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .poly import ParamPoly
from .series import Coeff, TruncatedSeries, c_add, c_eq, c_is_zero, c_mul, var_names
from .symbols import Symbol, field_sym, var_sym


def ambient_names(nvars: int) -> list[str]:
    return var_names(nvars) + ["u"]


class VectorField:
    __slots__ = ("nvars", "mat", "trans")

    def __init__(self, nvars: int, mat: Sequence[Sequence[Coeff]], trans: Sequence[Coeff]):
        self.nvars = nvars
        m = nvars + 1
        if len(mat) != m or any(len(row) != m for row in mat) or len(trans) != m:
            raise ValueError("field shape mismatch for n=%d" % nvars)
        self.mat = [list(row) for row in mat]
        self.trans = list(trans)

    # -- constructors ------------------------------------------------------
    @staticmethod
    def zero(nvars: int) -> "VectorField":
        m = nvars + 1
        z = Fraction(0)
        return VectorField(nvars, [[z] * m for _ in range(m)], [z] * m)

    @staticmethod
    def generic_symbolic(nvars: int) -> "VectorField":
        """All (n+1)(n+2) entries fresh field symbols, the unknowns of the
        tangency system: base rows A[i,j], B[i], T[i]; graph row C[j], D,
        T[0]."""
        n = nvars
        mat: list[list[Coeff]] = []
        trans: list[Coeff] = []
        for i in range(1, n + 1):
            row: list[Coeff] = [ParamPoly.symbol(field_sym("A", i, j)) for j in range(1, n + 1)]
            row.append(ParamPoly.symbol(field_sym("B", i)))
            mat.append(row)
            trans.append(ParamPoly.symbol(field_sym("T", i)))
        row = [ParamPoly.symbol(field_sym("C", j)) for j in range(1, n + 1)]
        row.append(ParamPoly.symbol(field_sym("D")))
        mat.append(row)
        trans.append(ParamPoly.symbol(field_sym("T", 0)))
        return VectorField(n, mat, trans)

    @staticmethod
    def from_components(nvars: int, comps: Mapping[str, Coeff]) -> "VectorField":
        """Build from affine component expressions keyed 'dx', 'dy', ...,
        'du'.  Components are polynomials in the coordinate var-symbols;
        anything of degree >= 2 in the coordinates is rejected."""
        names = ambient_names(nvars)
        vsyms = [var_sym(nm) for nm in names]
        out = VectorField.zero(nvars)
        for key, val in comps.items():
            if not key.startswith("d") or key[1:] not in names:
                raise ValueError("unknown component %r" % key)
            i = names.index(key[1:])
            p = ParamPoly.coerce(val)
            taken = ParamPoly.zero()
            for j, vs in enumerate(vsyms):
                if p.degree_in(vs) > 1:
                    raise ValueError("component %r not affine in %s" % (key, vs.name))
                cj = p.coeff_of(vs, 1)
                for s in cj.symbols():
                    if s.kind == "var":
                        raise ValueError("component %r not affine" % key)
                out.mat[i][j] = _tighten(cj)
                taken = taken + cj * ParamPoly.symbol(vs)
            const = p - taken
            for s in const.symbols():
                if s.kind == "var":
                    raise ValueError("component %r not affine" % key)
            out.trans[i] = _tighten(const)
        return out

    # -- algebra -----------------------------------------------------------
    def __add__(self, other: "VectorField") -> "VectorField":
        m = self.nvars + 1
        return VectorField(
            self.nvars,
            [[c_add(self.mat[i][j], other.mat[i][j]) for j in range(m)] for i in range(m)],
            [c_add(self.trans[i], other.trans[i]) for i in range(m)])

    def scale(self, q: Coeff) -> "VectorField":
        m = self.nvars + 1
        return VectorField(
            self.nvars,
            [[c_mul(self.mat[i][j], q) for j in range(m)] for i in range(m)],
            [c_mul(self.trans[i], q) for i in range(m)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scale(Fraction(-1))

    @property
    def is_zero(self) -> bool:
        return (all(c_is_zero(v) for row in self.mat for v in row)
                and all(c_is_zero(v) for v in self.trans))

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        if self.nvars != other.nvars:
            return False
        return (self - other).is_zero

    def substitute(self, assignment) -> "VectorField":
        def sub(v: Coeff) -> Coeff:
            if isinstance(v, ParamPoly):
                v = v.substitute(assignment)
                q = v.as_rational()
                return q if q is not None else v
            return v
        m = self.nvars + 1
        return VectorField(self.nvars,
                           [[sub(self.mat[i][j]) for j in range(m)] for i in range(m)],
                           [sub(v) for v in self.trans])

    def origin_value(self) -> list[Coeff]:
        return list(self.trans)

    # -- rendering ---------------------------------------------------------
    def render(self) -> str:
        names = ambient_names(self.nvars)
        comps = []
        for i in range(self.nvars + 1):
            expr = _affine_str(self.trans[i], self.mat[i], names)
            if expr != "0":
                comps.append("(%s)d%s" % (expr, names[i]))
        return " + ".join(comps) if comps else "0"

    __repr__ = render
    __str__ = render


def _tighten(p: ParamPoly) -> Coeff:
    q = p.as_rational()
    return q if q is not None else p


def _coeff_str(c: Coeff) -> str:
    if isinstance(c, ParamPoly):
        q = c.as_rational()
        if q is not None:
            return str(q)
        s = str(c)
        return s if len(c.terms) == 1 and not s.startswith("-") else "(%s)" % s
    return str(c)


def _affine_str(const: Coeff, row: Sequence[Coeff], names: Sequence[str]) -> str:
    parts: list[str] = []
    if not c_is_zero(const):
        parts.append(_coeff_str(const))
    for j, c in enumerate(row):
        if c_is_zero(c):
            continue
        if c_eq(c, Fraction(1)):
            term = names[j]
        elif c_eq(c, Fraction(-1)):
            term = "-" + names[j]
        else:
            term = "%s*%s" % (_coeff_str(c), names[j])
        parts.append(term)
    if not parts:
        return "0"
    out = parts[0]
    for term in parts[1:]:
        out += (" - " + term[1:]) if term.startswith("-") else (" + " + term)
    return out


def lie_bracket(f1: VectorField, f2: VectorField) -> VectorField:
    if f1.nvars != f2.nvars:
        raise ValueError("bracket of fields on different spaces")
    m = f1.nvars + 1

    def matmul(a, b):
        out = [[Fraction(0)] * m for _ in range(m)]
        for i in range(m):
            for k in range(m):
                aik = a[i][k]
                if c_is_zero(aik):
                    continue
                for j in range(m):
                    if c_is_zero(b[k][j]):
                        continue
                    out[i][j] = c_add(out[i][j], c_mul(aik, b[k][j]))
        return out

    def matvec(a, t):
        out = [Fraction(0)] * m
        for i in range(m):
            for k in range(m):
                if c_is_zero(a[i][k]) or c_is_zero(t[k]):
                    continue
                out[i] = c_add(out[i], c_mul(a[i][k], t[k]))
        return out

    m21 = matmul(f2.mat, f1.mat)
    m12 = matmul(f1.mat, f2.mat)
    mat = [[c_add(m21[i][j], c_mul(m12[i][j], Fraction(-1))) for j in range(m)]
           for i in range(m)]
    t21 = matvec(f2.mat, f1.trans)
    t12 = matvec(f1.mat, f2.trans)
    trans = [c_add(t21[i], c_mul(t12[i], Fraction(-1))) for i in range(m)]
    return VectorField(f1.nvars, mat, trans)


def linear_combination(coeffs: Sequence[Coeff], fields: Sequence[VectorField]) -> VectorField:
    if len(coeffs) != len(fields):
        raise ValueError("length mismatch")
    if not fields:
        raise ValueError("empty combination")
    out = VectorField.zero(fields[0].nvars)
    for c, f in zip(coeffs, fields):
        if not c_is_zero(c):
            out = out + f.scale(c)
    return out


def tangency_residual(field: VectorField, f_series: TruncatedSeries) -> TruncatedSeries:
    """L(-u + F) restricted to the graph u = F; identically zero through the
    returned bound iff the field is tangent to that order.

    The residual is   sum_i comp_i(x, F) * dF/dx_i - comp_u(x, F)   and is
    valid through order bound(F) - 1.
    """
    n = f_series.nvars
    if field.nvars != n:
        raise ValueError("field/series variable mismatch")
    bound = f_series.bound - 1

    def component(i: int) -> TruncatedSeries:
        acc = TruncatedSeries.constant(n, f_series.bound, field.trans[i])
        for j in range(n):
            c = field.mat[i][j]
            if not c_is_zero(c):
                acc = acc + TruncatedSeries.variable(n, f_series.bound, j).scale(c)
        cu = field.mat[i][n]
        if not c_is_zero(cu):
            acc = acc + f_series.scale(cu)
        return acc

    res = component(n).truncate(bound).scale(Fraction(-1))
    for i in range(n):
        res = res + component(i) * f_series.diff(i)
    return res
