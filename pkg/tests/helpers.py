"""Shared helpers for the test suite."""
from fractions import Fraction

from hessrank1.hessian import is_free_shape
from hessrank1.poly import ParamPoly
from hessrank1.series import jet_of
from hessrank1.symmetry import rref


def iter_exponents(nvars, total):
    if nvars == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in iter_exponents(nvars - 1, total - head):
            yield (head,) + rest


def graph_jets(s):
    """Jet table of a series with every free-shape entry explicit."""
    jt = jet_of(s)
    for d in range(s.bound + 1):
        for alpha in iter_exponents(s.nvars, d):
            if is_free_shape(alpha) and alpha not in jt.entries:
                jt.set(alpha, Fraction(0))
    return jt


def flatten_field(f):
    """VectorField as a flat rational vector (matrix rows, then translation)."""
    out = []
    for row in f.mat:
        for v in row:
            out.append(ParamPoly.coerce(v).as_rational())
    for v in f.trans:
        out.append(ParamPoly.coerce(v).as_rational())
    assert all(q is not None for q in out), "field has symbolic entries"
    return out


def span_rank(vectors):
    rows = [list(Fraction(q) for q in v) for v in vectors]
    if not rows:
        return 0
    _, pivots = rref(rows)
    return len(pivots)


def same_span(fields_a, fields_b):
    a = [flatten_field(f) for f in fields_a]
    b = [flatten_field(f) for f in fields_b]
    ra, rb = span_rank(a), span_rank(b)
    return ra == rb == span_rank(a + b)


def in_span(field, basis):
    b = [flatten_field(f) for f in basis]
    return span_rank(b + [flatten_field(field)]) == span_rank(b)
