"""Affine-map bookkeeping: normalization states, eqFG, prenormalized shapes."""
from fractions import Fraction

import pytest

from hessrank1.equivalence import (AffineMapSym, BookkeepingError,
                                   NormalizationState, jet_name,
                                   parse_log_symbol, parse_prenorm,
                                   rational_root, replay_line,
                                   stability_check, state_from_prenorm)
from hessrank1.exprparse import ExprError
from hessrank1.hessian import CompletionMismatch
from hessrank1.models import model_series
from hessrank1.poly import ParamPoly, SolveError
from hessrank1.symbols import group_sym, jet_sym

from helpers import graph_jets

F = Fraction


def test_rational_root():
    assert rational_root(F(8), 3) == 2
    assert rational_root(F(4, 9), 2) == F(2, 3)
    assert rational_root(F(-27, 8), 3) == F(-3, 2)
    assert rational_root(F(1), 5) == 1


def test_rational_root_even_root_is_positive():
    assert rational_root(F(16), 2) == 4


def test_rational_root_failures():
    with pytest.raises(SolveError):
        rational_root(F(2), 2)
    with pytest.raises(SolveError):
        rational_root(F(-4), 2)


def test_log_symbol_round_trip():
    for name in ("F[5,0]", "G[2,1,0]", "A[1,2]", "T[3]", "a[1,1]", "b[2]", "d"):
        assert parse_log_symbol(name).name == name
    assert jet_name("F", (5, 0)) == "F[5,0]"
    with pytest.raises(ExprError):
        parse_log_symbol("Q[1]")


def test_start_quadric_shape():
    st = NormalizationState.start_quadric(2, 8)
    assert st.jet_value((2, 0)) == 1
    assert st.jet_value((0, 1)) == 0
    # free entries above order 2 stay symbolic
    v = st.jet_value((3, 1))
    assert isinstance(v, ParamPoly) and v == ParamPoly.symbol(jet_sym("F", (3, 1)))
    # completion entries are forced polynomials in the free symbols
    c22 = st.jet_value((2, 2))
    assert isinstance(c22, ParamPoly)


def test_ensure_order_beyond_bound():
    st = NormalizationState.start_quadric(2, 4)
    with pytest.raises(BookkeepingError):
        st.ensure_order(5)


def test_identity_map_on_equal_graphs_has_zero_residual():
    jets = graph_jets(model_series("cayley2", 8))
    gjets = graph_jets(model_series("cayley2", 8))
    ident = AffineMapSym.diagonal(2, [0, 0], 0)
    st = NormalizationState(2, 8, jets, gjets, ident)
    assert st.map_residual(8).is_zero
    assert all(eq.trivial for eq in st.build_map_equations(8))


def test_scaled_map_changes_residual():
    jets = graph_jets(model_series("cayley2", 8))
    gjets = graph_jets(model_series("cayley2", 8))
    twice = AffineMapSym.diagonal(2, [0, 0], 0)
    twice.d = F(2)
    st = NormalizationState(2, 8, jets, gjets, twice)
    assert not st.map_residual(8).is_zero


def test_terminal_states_satisfy_the_map_equation(replays):
    """Every emitted model's solved map really carries its graph to the
    mirrored graph, with any residual stabilizer parameters left symbolic."""
    for tree, order in (("tree-n2", 8), ("tree-n3", 8), ("tree-n4", 8)):
        for name, emitted in replays[tree].models.items():
            res = emitted.state.map_residual(order)
            assert res.is_zero, (tree, name)


def test_normalize_pins_target_and_solves_parameter():
    st = NormalizationState.start_quadric(2, 8)
    st.stabilize_through(2)
    replay_line(st, "normalize G[3,0] := 0 solving b[1]")
    assert st.gjets.get((3, 0)) == 0
    assert group_sym("b", 1) in st.solutions
    assert "normalize G[3,0] := 0 solving b[1]" in st.log


def test_assume_zero_pins_both_sides():
    st = NormalizationState.start_quadric(2, 8)
    st.assume_zero((2, 1))
    assert st.fjets.get((2, 1)) == 0
    assert st.gjets.get((2, 1)) == 0


def test_assume_zero_rejects_forced_shapes():
    st = NormalizationState.start_quadric(2, 8)
    with pytest.raises(BookkeepingError):
        st.assume_zero((2, 2))


def test_pin_forced_jet_mirrors_to_target_side():
    st = NormalizationState.start_quadric(2, 8)
    st.ensure_order(4)
    st.pin_forced_jet(jet_sym("F", (3, 1)), F(7))
    assert st.fjets.get((3, 1)) == 7
    assert st.gjets.get((3, 1)) == 7


def test_pin_conflict_detected():
    st = NormalizationState.start_quadric(2, 8)
    st.ensure_order(4)
    st.pin_forced_jet(jet_sym("F", (3, 1)), F(7))
    with pytest.raises(BookkeepingError):
        st._pin(st.fjets, "F", (3, 1), F(8))


def test_declare_parameter_places_one_symbol_on_both_sides():
    from hessrank1.symbols import branch_sym
    st = NormalizationState.start_quadric(2, 8)
    st.declare_parameter((5, 0), "theta")
    v = st.fjets.get((5, 0))
    assert v == ParamPoly.symbol(branch_sym("theta"))
    assert st.gjets.get((5, 0)) == v


def test_stability_check_runs_on_a_clone():
    st = NormalizationState.start_quadric(2, 8)
    before = dict(st.solutions)
    rep = stability_check(st, 2)
    assert rep.order == 2
    assert st.solutions == before
    assert all(s.kind == "group" for s in rep.solutions)


def test_replay_line_rejects_unknown_directives():
    st = NormalizationState.start_quadric(2, 8)
    with pytest.raises(ExprError):
        replay_line(st, "frobnicate F[2,1]")


def test_prenorm_file_loads_and_completes(data_dir):
    data = parse_prenorm((data_dir / "prenorm-n3.txt").read_text())
    assert data.nvars == 3
    assert data.bound >= 8
    st = state_from_prenorm(data)
    assert st.jet_value((2, 0, 0)) == 1
    st.ensure_order(data.bound)     # all derived lines agree with the minors


def test_prenorm_derived_lines_are_verified(data_dir):
    text = (data_dir / "prenorm-n3.txt").read_text()
    lines = text.splitlines()
    for i, ln in enumerate(lines):
        if ln.strip().startswith("derived") and "=" in ln:
            left, _, right = ln.partition("=")
            lines[i] = left + "= 999 + " + right.strip()
            break
    bad = parse_prenorm("\n".join(lines))
    with pytest.raises(CompletionMismatch):
        st = state_from_prenorm(bad)
        st.ensure_order(bad.bound)


def test_prenorm_rejects_malformed_text():
    with pytest.raises(ExprError):
        parse_prenorm("dimension 2\nentry 2 0 = 1\n")   # no bound
    with pytest.raises(ExprError):
        parse_prenorm("dimension 2\nbound 4\nwhatever 1\n")
