"""Affine vector fields, brackets, tangency residuals."""
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hessrank1.affine import (VectorField, lie_bracket, linear_combination,
                              tangency_residual)
from hessrank1.exprparse import ExprError, parse_expr
from hessrank1.models import model_series
from hessrank1.poly import ParamPoly
from hessrank1.series import TruncatedSeries
from hessrank1.symbols import var_sym

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")

F = Fraction


def field(nvars, comps):
    def resolve(name, index):
        if index is not None:
            raise ExprError("no indexed names here")
        return ParamPoly.symbol(var_sym(name))
    parsed = {k: parse_expr(v, resolve) for k, v in comps.items()}
    return VectorField.from_components(nvars, parsed)


E1 = field(2, {"dx": "1 - y", "du": "x"})
E2 = field(2, {"dy": "1 - y", "du": "u"})
E3 = field(2, {"dx": "x", "du": "2*u"})
E4 = field(2, {"dx": "-u", "dy": "x"})


def test_from_components_shape():
    assert E1.nvars == 2
    assert E1.origin_value() == [1, 0, 0]
    assert E4.origin_value() == [0, 0, 0]


def test_from_components_rejects_nonaffine():
    def resolve(name, index):
        return ParamPoly.symbol(var_sym(name))
    with pytest.raises(ValueError):
        VectorField.from_components(2, {"dx": parse_expr("x*y", resolve)})
    with pytest.raises(ValueError):
        VectorField.from_components(2, {"dx": parse_expr("x^2", resolve)})


def test_from_components_rejects_unknown_direction():
    with pytest.raises(ValueError):
        field(2, {"dz": "x"})


def test_vector_space_operations():
    s = E1.scale(F(2)) - E1
    assert s == E1
    assert (E1 - E1).is_zero
    assert linear_combination([F(1), F(-1)], [E1, E1]).is_zero
    combo = linear_combination([F(2), F(3)], [E1, E2])
    assert combo == E1.scale(F(2)) + E2.scale(F(3))


def test_render_is_readable_and_stable():
    txt = E1.render()
    assert "dx" in txt and "du" in txt
    assert txt == field(2, {"dx": "1 - y", "du": "x"}).render()


def test_bracket_known_table():
    assert lie_bracket(E1, E2) == E1
    assert lie_bracket(E1, E3) == E1
    assert lie_bracket(E1, E4) == E2
    assert lie_bracket(E2, E3).is_zero
    assert lie_bracket(E2, E4) == E4
    assert lie_bracket(E3, E4) == E4


def test_bracket_of_commuting_translations():
    tx = field(2, {"dx": "1"})
    tu = field(2, {"du": "1"})
    assert lie_bracket(tx, tu).is_zero


def test_tangency_residual_zero_for_symmetry():
    s = model_series("cayley2", 9)
    for e in (E1, E2, E3, E4):
        assert tangency_residual(e, s).is_zero


def test_tangency_residual_nonzero_for_non_symmetry():
    s = model_series("cayley2", 9)
    res = tangency_residual(field(2, {"dx": "1"}), s)
    assert not res.is_zero
    # residual of d/dx on u = x^2/(2(1-y)) is F_x = x/(1-y): leading term x
    assert res.coeff((1, 0)) == 1


def test_tangency_residual_bound():
    s = model_series("cayley2", 9)
    assert tangency_residual(E1, s).bound == 8


def test_tangency_with_symbolic_entries():
    s = model_series("s-theta", 9)          # theta left symbolic
    gen = field(2, {"dx": "-x", "dy": "1 - y", "du": "-u"})
    assert tangency_residual(gen, s).is_zero


def rational_fields(nvars):
    q = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))
    m = nvars + 1
    return st.builds(
        lambda mat, tr: VectorField(nvars, mat, tr),
        st.lists(st.lists(q, min_size=m, max_size=m), min_size=m, max_size=m),
        st.lists(q, min_size=m, max_size=m))


@given(rational_fields(2), rational_fields(2))
def test_bracket_antisymmetry(f, g):
    assert lie_bracket(f, g) == lie_bracket(g, f).scale(F(-1))
    assert lie_bracket(f, f).is_zero


@given(rational_fields(2), rational_fields(2), rational_fields(2))
def test_bracket_jacobi(f, g, h):
    total = (lie_bracket(f, lie_bracket(g, h))
             + lie_bracket(g, lie_bracket(h, f))
             + lie_bracket(h, lie_bracket(f, g)))
    assert total.is_zero


@given(rational_fields(3), rational_fields(3))
def test_bracket_bilinear(f, g):
    assert lie_bracket(f.scale(F(3)), g) == lie_bracket(f, g).scale(F(3))
