"""Scripted replay of the branching classification trees.

A branch script is a plain-text file: a header fixing the dimension, the
series bound and the starting state, then an ordered list of steps with
nested ``branch`` blocks for the case splits.  Replay is deterministic;
every ``expect-*`` directive is an assertion, and a failed assertion
aborts the run with a diff in the report.

Script syntax (``#`` starts a comment)::

    tree n2
    dimension 2
    bound 11
    start quadric                  # or: start prenorm <file>

    stabilize-through 2
    normalize G[3,0] := 0 solving b[1]
    propagate-order 3
    branch F21-zero {
        assume-zero F[2,1]
        ...
        expect-cylinder-through 8
    }
    assume-nonzero F[2,1]
    ...
    emit-model cayley2
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .equivalence import (BookkeepingError, NormalizationState, jet_name,
                          parse_log_symbol, parse_prenorm, replay_line,
                          state_from_prenorm)
from .exprparse import ExprError, parse_expr, parse_jet_index
from .hessian import is_free_shape
from .poly import ParamPoly, SolveError
from .series import Coeff, c_eq, c_is_zero
from .symbols import Symbol, branch_sym, is_translation, jet_sym
from .symmetry import (ContradictionWitness, PropagationOutcome,
                       field_columns, propagate_homogeneity)


class ScriptError(ValueError):
    """Malformed script text, or a step used where it cannot apply."""


class ExpectationFailed(RuntimeError):
    """An expect-* directive did not match the replayed state."""


@dataclass
class Step:
    lineno: int
    text: str


@dataclass
class Block:
    lineno: int
    label: str
    body: list


@dataclass
class BranchScript:
    name: str
    dimension: int
    bound: int
    start_kind: str                 # "quadric" or "prenorm"
    start_arg: Optional[str]
    body: list                      # Step and Block nodes
    source: Optional[Path] = None


def parse_branch_script(text: str, source: Optional[Path] = None) -> BranchScript:
    name = None
    dimension = None
    bound = None
    start_kind = None
    start_arg = None
    body: list = []
    stack = [body]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0]
        if head == "tree":
            if len(toks) != 2:
                raise ScriptError("line %d: tree wants one name" % lineno)
            name = toks[1]
        elif head == "dimension":
            if len(toks) != 2 or not toks[1].isdigit():
                raise ScriptError("line %d: malformed dimension" % lineno)
            dimension = int(toks[1])
        elif head == "bound":
            if len(toks) != 2 or not toks[1].isdigit():
                raise ScriptError("line %d: malformed bound" % lineno)
            bound = int(toks[1])
        elif head == "start":
            if len(toks) == 2 and toks[1] == "quadric":
                start_kind, start_arg = "quadric", None
            elif len(toks) == 3 and toks[1] == "prenorm":
                start_kind, start_arg = "prenorm", toks[2]
            else:
                raise ScriptError("line %d: start wants 'quadric' or 'prenorm <file>'"
                                  % lineno)
        elif head == "branch":
            if toks[-1] != "{":
                raise ScriptError("line %d: branch line must end with '{'" % lineno)
            label = " ".join(toks[1:-1]).strip('"')
            if not label:
                raise ScriptError("line %d: branch wants a label" % lineno)
            block = Block(lineno, label, [])
            stack[-1].append(block)
            stack.append(block.body)
        elif head == "}":
            if len(stack) == 1:
                raise ScriptError("line %d: unmatched '}'" % lineno)
            stack.pop()
        else:
            stack[-1].append(Step(lineno, line))

    if len(stack) != 1:
        raise ScriptError("unclosed branch block")
    if dimension is None:
        raise ScriptError("script does not declare a dimension")
    if bound is None:
        raise ScriptError("script does not declare a bound")
    if start_kind is None:
        raise ScriptError("script does not declare a start state")
    return BranchScript(name or "unnamed", dimension, bound,
                        start_kind, start_arg, body, source)


def load_branch_script(path) -> BranchScript:
    p = Path(path)
    return parse_branch_script(p.read_text(), source=p)


@dataclass
class EmittedModel:
    name: str
    state: NormalizationState
    field_solutions: dict[Symbol, Coeff]
    parameters: dict[str, Symbol]


@dataclass
class ReplayReport:
    script: BranchScript
    lines: list[str] = dc_field(default_factory=list)
    models: dict[str, EmittedModel] = dc_field(default_factory=dict)
    expectations: int = 0
    ok: bool = True
    failure: Optional[str] = None

    def render(self) -> str:
        return "\n".join(self.lines) + "\n"


@dataclass
class _Frame:
    state: NormalizationState
    fsol: dict[Symbol, Coeff]
    params: dict[str, Symbol]
    last: Optional[PropagationOutcome] = None
    dead: bool = False              # contradiction seen, not yet asserted
    closed: bool = False            # contradiction asserted; branch ends


def _coeff_str(v: Coeff) -> str:
    return str(v)


def _as_fraction(v: Coeff) -> Optional[Fraction]:
    if isinstance(v, ParamPoly):
        return v.as_rational()
    return Fraction(v)


def _sorted_syms(d: dict[Symbol, Coeff]) -> list[Symbol]:
    return sorted(d, key=lambda s: (s.sort_key()))


def _echo_initial(frame: _Frame, out: list[str]) -> None:
    st = frame.state
    pinned = []
    free = []
    for alpha in sorted(st.fjets.entries, key=lambda a: (sum(a), tuple(-i for i in a))):
        if not is_free_shape(alpha):
            continue
        val = st.fjets.entries[alpha]
        sym_poly = ParamPoly.symbol(jet_sym("F", alpha))
        if isinstance(val, ParamPoly) and val == sym_poly:
            free.append(jet_name("F", alpha))
        elif not c_is_zero(val):
            pinned.append("jet %s = %s" % (jet_name("F", alpha), _coeff_str(val)))
    out.extend(pinned)
    if free:
        out.append("free jets: " + " ".join(free))


def _resolver_for(frame: _Frame):
    st = frame.state

    def resolve(name: str, index: Optional[tuple]):
        if index is not None:
            if name != "F":
                raise ExprError("only F jets may appear here, not %s" % name)
            return st.jet_value(index)
        if name in frame.params:
            return ParamPoly.symbol(frame.params[name])
        raise ExprError("unknown name %r (not a declared parameter)" % name)

    return resolve


def _start_state(script: BranchScript, data_dir: Optional[Path]) -> NormalizationState:
    if script.start_kind == "quadric":
        return NormalizationState.start_quadric(script.dimension, script.bound)
    candidates = []
    if script.source is not None:
        candidates.append(script.source.parent / script.start_arg)
    if data_dir is not None:
        candidates.append(Path(data_dir) / script.start_arg)
    candidates.append(Path(__file__).parent / "data" / script.start_arg)
    for c in candidates:
        if c.is_file():
            data = parse_prenorm(c.read_text())
            if data.nvars != script.dimension:
                raise ScriptError("prenorm file %s has dimension %d, script wants %d"
                                  % (c.name, data.nvars, script.dimension))
            st = state_from_prenorm(data)
            if script.bound > st.bound:
                st.bound = script.bound
            return st
    raise ScriptError("prenorm file %r not found" % script.start_arg)


def run_branch_script(script: BranchScript,
                      data_dir: Optional[Path] = None) -> ReplayReport:
    report = ReplayReport(script)
    report.lines.append("tree %s" % script.name)
    report.lines.append("dimension %d" % script.dimension)
    report.lines.append("bound %d" % script.bound)
    report.lines.append("start %s" % (script.start_kind if script.start_arg is None
                                      else "%s %s" % (script.start_kind, script.start_arg)))

    root = _Frame(_start_state(script, data_dir), {}, {})
    if not script.body:
        _echo_initial(root, report.lines)

    try:
        _run_block(script.body, root, 0, report)
    except ExpectationFailed as e:
        report.ok = False
        report.failure = str(e)
        report.lines.append("result: FAILED: %s" % e)
        return report
    except (BookkeepingError, SolveError, ExprError) as e:
        report.ok = False
        report.failure = "%s: %s" % (type(e).__name__, e)
        report.lines.append("result: FAILED: %s" % report.failure)
        return report

    report.lines.append("result: ok (%d expectations checked, %d models emitted)"
                        % (report.expectations, len(report.models)))
    return report


def _run_block(nodes: list, frame: _Frame, depth: int, report: ReplayReport) -> None:
    indent = "  " * (depth + 1)
    for node in nodes:
        if frame.closed:
            raise ScriptError("line %d: branch already ended by a contradiction"
                              % node.lineno)
        if isinstance(node, Block):
            if frame.dead:
                raise ScriptError("line %d: cannot branch after an unasserted "
                                  "contradiction" % node.lineno)
            report.lines.append('%sbranch "%s"' % (indent, node.label))
            child = _Frame(frame.state.clone(), dict(frame.fsol),
                           dict(frame.params), frame.last)
            _run_block(node.body, child, depth + 1, report)
            report.lines.append('%send branch "%s"' % (indent, node.label))
            continue
        _run_step(node, frame, indent, report)


def _run_step(step: Step, frame: _Frame, indent: str, report: ReplayReport) -> None:
    toks = step.text.split()
    head = toks[0]
    if frame.dead and head != "expect-contradiction":
        raise ScriptError("line %d: a contradiction is pending; only "
                          "expect-contradiction may follow" % step.lineno)

    if head in ("assume-zero", "assume-nonzero", "normalize", "stabilize-through"):
        replay_line(frame.state, step.text)
        report.lines.append(indent + "step " + step.text)
        return

    if head == "propagate-order":
        if len(toks) != 2 or not toks[1].isdigit():
            raise ScriptError("line %d: malformed propagate-order" % step.lineno)
        order = int(toks[1])
        out = propagate_homogeneity(frame.state, frame.fsol, order)
        frame.fsol.update(out.solved_isotropy)
        frame.last = out
        parts = []
        if out.solved_isotropy:
            parts.append("solved " + " ".join(s.name for s in
                                              _sorted_syms(out.solved_isotropy)))
        for s in _sorted_syms(out.forced_jets):
            parts.append("forced %s := %s" % (s.name, _coeff_str(out.forced_jets[s])))
        for sp in out.split_requests:
            parts.append("split at %s blocked by %s"
                         % (jet_name("F", sp.alpha),
                            " ".join(b.name for b in sorted(sp.blocking,
                                                            key=lambda s: s.sort_key()))))
        if out.contradiction is not None:
            parts.append("contradiction: " + out.contradiction.describe())
            frame.dead = True
        report.lines.append(indent + "step " + step.text
                            + (" :: " + "; ".join(parts) if parts else " :: quiet"))
        return

    if head == "declare-parameter":
        if len(toks) != 3:
            raise ScriptError("line %d: declare-parameter wants a jet and a name"
                              % step.lineno)
        alpha = parse_jet_index(toks[1])
        pname = toks[2]
        if pname in frame.params:
            raise ScriptError("line %d: parameter %r already declared"
                              % (step.lineno, pname))
        frame.state.declare_parameter(alpha, pname)
        frame.params[pname] = branch_sym(pname)
        report.lines.append(indent + "step " + step.text)
        return

    if head == "expect-forced":
        if len(toks) < 4 or toks[2] != "=":
            raise ScriptError("line %d: expect-forced wants 'F[..] = <expr>'"
                              % step.lineno)
        alpha = parse_jet_index(toks[1])
        expr = step.text.split("=", 1)[1].strip()
        expected = parse_expr(expr, _resolver_for(frame))
        actual = frame.state.jet_value(alpha)
        report.expectations += 1
        if not c_eq(actual, expected):
            raise ExpectationFailed("line %d: %s is %s, expected %s"
                                    % (step.lineno, jet_name("F", alpha),
                                       _coeff_str(actual), _coeff_str(expected)))
        report.lines.append(indent + "step " + step.text + " :: ok")
        return

    if head == "expect-contradiction":
        report.expectations += 1
        w = frame.last.contradiction if frame.last is not None else None
        if w is None:
            raise ExpectationFailed("line %d: no contradiction was found"
                                    % step.lineno)
        _check_contradiction(step, toks[1:], w)
        frame.dead = False
        frame.closed = True
        report.lines.append(indent + "step " + step.text
                            + " :: confirmed (%s)" % w.describe())
        return

    if head == "expect-dimension":
        if len(toks) != 2 or not toks[1].isdigit():
            raise ScriptError("line %d: malformed expect-dimension" % step.lineno)
        want = int(toks[1])
        n = frame.state.n
        unsolved = [s for s in field_columns(n)
                    if s not in frame.fsol and not is_translation(s, n)]
        dim = n + len(unsolved)
        report.expectations += 1
        if dim != want:
            raise ExpectationFailed(
                "line %d: symmetry dimension is %d (translations %d + free %s), "
                "expected %d" % (step.lineno, dim, n,
                                 " ".join(s.name for s in unsolved) or "none", want))
        report.lines.append(indent + "step " + step.text
                            + " :: ok (free isotropy: %s)"
                            % (" ".join(s.name for s in unsolved) or "none"))
        return

    if head == "expect-cylinder-through":
        if len(toks) != 2 or not toks[1].isdigit():
            raise ScriptError("line %d: malformed expect-cylinder-through"
                              % step.lineno)
        through = int(toks[1])
        st = frame.state
        st.ensure_order(min(through, st.bound))
        offenders = []
        for alpha in sorted(st.fjets.entries,
                            key=lambda a: (sum(a), tuple(-i for i in a))):
            if sum(alpha) > through or sum(alpha[1:]) == 0:
                continue
            if not c_is_zero(st.jet_value(alpha)):
                offenders.append(jet_name("F", alpha))
        report.expectations += 1
        if offenders:
            raise ExpectationFailed("line %d: not a cylinder: nonzero %s"
                                    % (step.lineno, " ".join(offenders)))
        report.lines.append(indent + "step " + step.text
                            + " :: cylinder verdict: every jet involving the "
                              "fibre variables vanishes through order %d" % through)
        return

    if head == "emit-model":
        if len(toks) != 2:
            raise ScriptError("line %d: emit-model wants one name" % step.lineno)
        name = toks[1]
        if name in report.models:
            raise ScriptError("line %d: model %r emitted twice" % (step.lineno, name))
        checked = _catalog_mismatch(step, name, frame)
        report.models[name] = EmittedModel(name, frame.state.clone(),
                                           dict(frame.fsol), dict(frame.params))
        report.lines.append(indent + "step " + step.text + " :: recorded"
                            + (", matches catalog" if checked else ""))
        return

    raise ScriptError("line %d: unknown step %r" % (step.lineno, head))


def _catalog_mismatch(step: Step, name: str, frame: _Frame) -> bool:
    """Compare the emitted state against the catalog's record of `name`.

    True when a catalog entry claims the name and every coefficient
    agrees; a disagreement aborts the replay.  Imported lazily because
    the catalog itself replays scripts through this module.
    """
    from .models import reference_series
    ref = reference_series(name, frame.state.bound)
    if ref is None:
        return False
    got = frame.state.fjets.to_series(ref.bound)
    for alpha, want in ref.sorted_terms():
        if not c_eq(got.coeff(alpha), want):
            raise ExpectationFailed(
                "line %d: emitted state disagrees with the catalog record of %r "
                "at %s: catalog %s, state %s"
                % (step.lineno, name, alpha, _coeff_str(want),
                   _coeff_str(got.coeff(alpha))))
    for alpha, have in got.sorted_terms():
        if not c_eq(ref.coeff(alpha), have):
            raise ExpectationFailed(
                "line %d: emitted state disagrees with the catalog record of %r "
                "at %s: catalog %s, state %s"
                % (step.lineno, name, alpha, _coeff_str(ref.coeff(alpha)),
                   _coeff_str(have)))
    return True


def _check_contradiction(step: Step, tail: list[str], w: ContradictionWitness) -> None:
    if not tail:
        return
    if tail[0] == "coefficient":
        if len(tail) != 4 or tail[2] != "on":
            raise ScriptError("line %d: want 'coefficient <q> on T[i]'" % step.lineno)
        want_q = Fraction(tail[1])
        want_t = parse_log_symbol(tail[3])
        got_q = _as_fraction(w.value)
        if w.t_symbol != want_t or got_q != want_q:
            raise ExpectationFailed(
                "line %d: contradiction is coefficient %s on %s, expected %s on %s"
                % (step.lineno, _coeff_str(w.value), w.t_symbol.name,
                   want_q, want_t.name))
        return
    if tail[0] == "conflict":
        if len(tail) != 4:
            raise ScriptError("line %d: want 'conflict F[..] <q1> <q2>'" % step.lineno)
        target = parse_log_symbol(tail[1])
        want = {Fraction(tail[2]), Fraction(tail[3])}
        for s, prior, required in w.conflicts:
            if s == target and {_as_fraction(prior), _as_fraction(required)} == want:
                return
        raise ExpectationFailed(
            "line %d: no conflict on %s with values {%s}; witness: %s"
            % (step.lineno, target.name,
               ", ".join(str(q) for q in sorted(want)), w.describe()))
    raise ScriptError("line %d: unknown expect-contradiction form %r"
                      % (step.lineno, tail[0]))
