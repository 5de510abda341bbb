"""Rank-1 Hessian checking and jet completion from the minors."""
from fractions import Fraction

import pytest

from hessrank1.hessian import (CompletionMismatch, check_hessian_rank1,
                               hessian_matrix, is_free_shape, rank1_complete)
from hessrank1.models import model_series
from hessrank1.series import JetTable, SeriesError, TruncatedSeries, jet_of

F = Fraction


def S(nvars, bound, terms):
    return TruncatedSeries(nvars, bound, {k: F(v) for k, v in terms.items()})


def test_free_shape_predicate():
    assert is_free_shape((4, 0))
    assert is_free_shape((4, 1))
    assert not is_free_shape((4, 2))
    assert is_free_shape((3, 0, 1))
    assert not is_free_shape((3, 1, 1))


def test_hessian_matrix_entries():
    s = S(2, 6, {(2, 0): F(1, 2), (2, 1): F(1, 2)})
    h = hessian_matrix(s)
    assert h[0][0].coeff((0, 0)) == 1
    assert h[0][0].coeff((0, 1)) == 1
    assert h[0][1].coeff((1, 0)) == 1
    assert h[1][1].is_zero


def test_rank1_yes_on_cylinder():
    rep = check_hessian_rank1(S(2, 8, {(2, 0): F(1, 2), (4, 0): 1}))
    assert rep.rank1
    assert rep.checked_through == 6
    assert "rank1: yes" in rep.render()


def test_rank1_no_with_witness():
    rep = check_hessian_rank1(S(2, 8, {(2, 0): F(1, 2), (0, 2): F(1, 2)}))
    assert not rep.rank1
    assert rep.failing_pair == ("y", "y")
    assert rep.failing_monomial == (0, 0)
    assert "failing-minor" in rep.render()


def test_rank1_failure_beyond_leading_order():
    # x^2/2 + y^4: the first bad minor appears at order 2 of the minor entry
    rep = check_hessian_rank1(S(2, 8, {(2, 0): F(1, 2), (0, 4): 1}))
    assert not rep.rank1
    assert rep.failing_monomial == (0, 2)


def test_catalog_models_pass():
    for name, order in (("cayley2", 9), ("merker3", 8)):
        rep = check_hessian_rank1(model_series(name, order))
        assert rep.rank1
        assert rep.checked_through == order - 2


def test_one_variable_is_trivially_rank1():
    rep = check_hessian_rank1(S(1, 6, {(2,): F(1, 2), (5,): 3}))
    assert rep.rank1


def substituted(s, mat):
    inners = []
    for i in range(s.nvars):
        t = {}
        for j in range(s.nvars):
            if mat[i][j]:
                e = tuple(1 if k == j else 0 for k in range(s.nvars))
                t[e] = F(mat[i][j])
        inners.append(TruncatedSeries(s.nvars, s.bound, t))
    return s.compose(inners)


def test_verdict_invariant_under_mixing_non_leading_variables():
    # x kept, y -> y + 2z, z -> -z + y/3
    mat = [[1, 0, 0], [0, 1, 2], [0, F(1, 3), -1]]
    good = model_series("merker3", 8)
    assert check_hessian_rank1(substituted(good, mat)).rank1
    bad = S(3, 8, {(2, 0, 0): F(1, 2), (0, 2, 0): F(1, 2)})
    assert not check_hessian_rank1(substituted(bad, mat)).rank1


def test_rank1_complete_produces_rank1_series():
    jets = JetTable(2, 8)
    jets.set((2, 0), F(1))
    jets.set((2, 1), F(1))
    jets.set((5, 0), F(20, 9))
    done = rank1_complete(jets, 8)
    rep = check_hessian_rank1(done.to_series(8))
    assert rep.rank1


def test_rank1_complete_idempotent():
    jets = JetTable(2, 8)
    jets.set((2, 0), F(1))
    jets.set((2, 1), F(1))
    once = rank1_complete(jets, 8)
    twice = rank1_complete(once, 8)
    assert twice.entries == once.entries


def test_rank1_complete_known_values():
    # u = x^2/(2(1-y)): jets (2,k) = 2 * k!/2 ... raw coefficient x^2 y^k is 1/2
    jets = jet_of(model_series("cayley2", 6))
    free = JetTable(2, 6)
    for alpha, v in jets.entries.items():
        if is_free_shape(alpha):
            free.set(alpha, v)
    done = rank1_complete(free, 6)
    assert done.to_series(6) == model_series("cayley2", 6)
    assert done.get((2, 2)) == 2
    assert done.get((2, 3)) == 6


def test_rank1_complete_detects_conflicts():
    jets = JetTable(2, 6)
    jets.set((2, 0), F(1))
    jets.set((2, 1), F(1))
    jets.set((2, 2), F(5))          # minors force 2
    with pytest.raises(CompletionMismatch) as exc:
        rank1_complete(jets, 6)
    assert exc.value.alpha == (2, 2)
    assert exc.value.computed == 2


def test_rank1_complete_verify_false_overwrites():
    jets = JetTable(2, 6)
    jets.set((2, 0), F(1))
    jets.set((2, 1), F(1))
    jets.set((2, 2), F(5))
    done = rank1_complete(jets, 6, verify=False)
    assert done.get((2, 2)) == 2


def test_rank1_complete_needs_unit_lead():
    jets = JetTable(2, 6)
    jets.set((2, 0), F(3))
    with pytest.raises(SeriesError):
        rank1_complete(jets, 6)
