"""Exact symmetry solving: dimensions, bases, and determinism."""
from fractions import Fraction

import pytest

from hessrank1.affine import tangency_residual
from hessrank1.models import get_model, model_series
from hessrank1.poly import SolveError
from hessrank1.symmetry import (SymmetryReport, field_columns, isotropy_count,
                                solve_symmetry)

from helpers import flatten_field, same_span, span_rank

F = Fraction

# (model name, theta, solve order, expected dimension)
DIMENSIONS = [
    ("cayley2", None, 9, 4),
    ("cayley2", None, 10, 4),
    ("s-theta", F(1), 8, 2),
    ("prop214", None, 7, 2),
    ("merker3", None, 8, 4),
    ("merker4-plus", None, 8, 4),
    ("merker4-minus", None, 8, 4),
]


def solved(name, theta, order):
    f = model_series(name, order + 1, theta=theta)
    return f, solve_symmetry(f, order)


@pytest.mark.parametrize("name,theta,order,dim", DIMENSIONS)
def test_dimension_matches_catalog(name, theta, order, dim):
    _, rep = solved(name, theta, order)
    assert rep.dimension == dim
    assert rep.stabilized
    assert len(rep.basis) == dim


@pytest.mark.parametrize("name,theta,order,dim", DIMENSIONS)
def test_basis_fields_are_tangent(name, theta, order, dim):
    f, rep = solved(name, theta, order)
    for b in rep.basis:
        res = tangency_residual(b, f)
        assert res.is_zero, "basis field %s has residual %s" % (b.render(), res)


def test_basis_is_linearly_independent():
    f, rep = solved("cayley2", None, 9)
    vecs = [flatten_field(b) for b in rep.basis]
    assert span_rank(vecs) == rep.dimension


def test_cayley2_basis_spans_catalog_generators():
    _, rep = solved("cayley2", None, 9)
    spec = get_model("cayley2")
    assert same_span(rep.basis, spec.generator_fields())


def test_merker3_basis_spans_catalog_generators():
    _, rep = solved("merker3", None, 8)
    spec = get_model("merker3")
    assert same_span(rep.basis, spec.generator_fields())


def test_dimension_prev_agrees_with_lower_order_solve():
    f = model_series("cayley2", 10)
    here = solve_symmetry(f, 8)
    below = solve_symmetry(f, 7)
    assert here.dimension_prev == below.dimension
    assert here.stabilized == (here.dimension == below.dimension)


def test_dimension_never_grows_with_order():
    f = model_series("prop214", 8)
    dims = [solve_symmetry(f, k).dimension for k in range(2, 8)]
    assert dims == sorted(dims, reverse=True)
    assert dims[-1] == 2


def test_render_is_deterministic():
    a = solved("merker4-plus", None, 8)[1].render()
    b = solved("merker4-plus", None, 8)[1].render()
    assert a == b
    assert a.startswith("order: 8\ndimension: 4\n")
    assert "stabilized: yes" in a


def test_order_beyond_series_bound_is_refused():
    f = model_series("cayley2", 6)
    with pytest.raises(SolveError):
        solve_symmetry(f, 6)  # needs jets through order + 1


def test_report_shape():
    _, rep = solved("s-theta", F(-2), 8)
    assert isinstance(rep, SymmetryReport)
    assert rep.order == 8
    assert rep.dimension == 2
    assert rep.dimension_prev == 2


def test_column_bookkeeping():
    assert isotropy_count(2) == 10
    assert isotropy_count(3) == 17
    assert len(field_columns(2)) == 12   # (n+1)(n+2)
    assert len(field_columns(4)) == 30
