"""Named symbols for the exact solver.

Four kinds of symbols occur in the computations:

* ``group``  -- entries of an affine map between two graphs: a[i,j], b[i],
  c[j], d.
* ``field``  -- entries of an affine vector field: translations T[1]..T[n]
  and T[0], linear part A[i,j], B[i], C[j], D.
* ``jet``    -- unresolved factorial-normalized Taylor coefficients of a
  graphing function, F[i,j,...] for the source side and G[...] for the
  target side.
* ``branch`` -- free parameters introduced by a classification branch
  (``theta``).
* ``var``    -- coordinate names used only by the expression parser.

Symbols are immutable values; two symbols are equal iff letter, index and
kind agree.
"""
from __future__ import annotations

from dataclasses import dataclass

GROUP = "group"
FIELD = "field"
JET = "jet"
BRANCH = "branch"
VAR = "var"


@dataclass(frozen=True)
class Symbol:
    letter: str
    index: tuple[int, ...]
    kind: str

    @property
    def name(self) -> str:
        if self.index:
            return "%s[%s]" % (self.letter, ",".join(str(i) for i in self.index))
        return self.letter

    def sort_key(self):
        return (self.letter, self.index)

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return self.name


def group_sym(letter: str, *index: int) -> Symbol:
    return Symbol(letter, tuple(index), GROUP)


def field_sym(letter: str, *index: int) -> Symbol:
    return Symbol(letter, tuple(index), FIELD)


def jet_sym(letter: str, alpha: tuple[int, ...]) -> Symbol:
    return Symbol(letter, tuple(alpha), JET)


def branch_sym(name: str) -> Symbol:
    return Symbol(name, (), BRANCH)


def var_sym(name: str) -> Symbol:
    return Symbol(name, (), VAR)


# Preference order used when an equation offers several solvable field
# parameters: translations are never solved; among the rest, T[0] is taken
# first, then D, then C, B, A; within a letter the later index wins.  This
# reproduces the customary pivot choices (D rather than A[1,1] at order 2,
# and A[1,1] kept free as long as possible).
_FIELD_LETTER_RANK = {"A": 0, "B": 1, "C": 2, "D": 3, "T": 4}


def field_solve_rank(sym: Symbol):
    """Sort key: larger means preferred as a pivot."""
    return (_FIELD_LETTER_RANK[sym.letter], sym.index)


def is_translation(sym: Symbol, n: int) -> bool:
    return sym.kind == FIELD and sym.letter == "T" and sym.index != (0,)


# Same idea for map parameters: d before c before b before a, later index
# first within a letter.
_GROUP_LETTER_RANK = {"a": 0, "b": 1, "c": 2, "d": 3}


def group_solve_rank(sym: Symbol):
    return (_GROUP_LETTER_RANK[sym.letter], sym.index)


def jet_solve_rank(sym: Symbol):
    """Pivot preference among jet symbols: highest total order, then index."""
    return (sum(sym.index), sym.index)
