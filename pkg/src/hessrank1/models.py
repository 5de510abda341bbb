"""Catalog of the affinely homogeneous rank-1 models and their verifiers.

Each catalog entry records what makes the model checkable: a construction
(closed form, or a stored jet), the symmetry generators, the bracket
table, a handful of anchor coefficients, and a pointer back to the branch
script that regenerates the jet.  ``verify_model`` recomputes everything
and compares; a failure is report content, never an exception.

Jet-listed models keep two independent copies of their coefficients (the
stored series file and the replayed classification tree), and
verification insists the two agree.  Sign conventions in the generator
tables were fixed by tangency itself; where one printed variant of a
component is not tangent, a ``note`` line in the catalog records the
resolution.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Optional

from .affine import VectorField, lie_bracket, linear_combination, tangency_residual
from .branch import load_branch_script, run_branch_script
from .exprparse import ExprError, parse_expr
from .hessian import HessianReport, check_hessian_rank1
from .poly import ParamPoly
from .series import (Coeff, Expo, SeriesError, TruncatedSeries, c_eq,
                     c_is_zero, parse_coeff, read_series, var_names)
from .symbols import Symbol, branch_sym, var_sym

DATA_DIR = Path(__file__).parent / "data"
THETA = branch_sym("theta")


class ModelError(ValueError):
    """Catalog data is malformed or inconsistent."""


class ModelUsageError(ModelError):
    """The caller asked for an order outside the model's contract."""


# -- closed-form constructions ---------------------------------------------------

def _cayley2(bound: int) -> TruncatedSeries:
    """x^2 / (2(1 - y))."""
    one = TruncatedSeries.constant(2, bound, Fraction(1))
    y = TruncatedSeries.variable(2, bound, 1)
    inv = (one - y).pow_rational(Fraction(-1))
    return inv * TruncatedSeries.monomial(2, bound, (2, 0), Fraction(1, 2))


def _merker3(bound: int) -> TruncatedSeries:
    """(1/(3 z^2)) ((1 - 2y + y^2 - 2xz)^(3/2) - (1 - y)(1 - 2y + y^2 - 3xz)).

    The numerator is divisible by z^2, so it is built two orders higher
    and the division is exact.
    """
    b = bound + 2
    one = TruncatedSeries.constant(3, b, Fraction(1))
    x = TruncatedSeries.variable(3, b, 0)
    y = TruncatedSeries.variable(3, b, 1)
    z = TruncatedSeries.variable(3, b, 2)
    core = one - y.scale(2) + y * y
    radicand = core - (x * z).scale(2)
    linear = (one - y) * (core - (x * z).scale(3))
    num = radicand.pow_rational(Fraction(3, 2)) - linear
    return num.divide_monomial((0, 0, 2)).scale(Fraction(1, 3))


_CLOSED_FORMS = {"cayley2": _cayley2, "merker3": _merker3}


# -- catalog ---------------------------------------------------------------------

@dataclass
class ModelSpec:
    name: str
    dimension: int
    algebra_dimension: int
    construction: str                      # "closed-form" | "jet"
    construction_arg: str                  # builder key, or series file name
    replay_file: str
    replay_name: str
    replay_bound: int                      # order through which the tree pins the jet
    verify_min: int
    has_parameter: bool = False
    generators: list[tuple[str, dict[str, str]]] = dc_field(default_factory=list)
    brackets: list[tuple[int, int, str]] = dc_field(default_factory=list)
    brackets_status: str = "stated"
    anchors: list[tuple[Expo, Coeff]] = dc_field(default_factory=list)
    notes: list[str] = dc_field(default_factory=list)

    def generator_names(self) -> list[str]:
        return [nm for nm, _ in self.generators]

    def generator_fields(self, theta: Optional[Fraction] = None) -> list[VectorField]:
        names = var_names(self.dimension) + ["u"]

        def resolve(name: str, index):
            if index is not None:
                raise ExprError("unexpected indexed name %r in generator" % name)
            if name in names:
                return ParamPoly.symbol(var_sym(name))
            if name == "theta" and self.has_parameter:
                return ParamPoly.coerce(theta) if theta is not None \
                    else ParamPoly.symbol(THETA)
            raise ExprError("unknown name %r in generator" % name)

        out = []
        for nm, comps in self.generators:
            parsed = {key: parse_expr(text, resolve) for key, text in comps.items()}
            out.append(VectorField.from_components(self.dimension, parsed))
        return out

    def data_bound(self) -> Optional[int]:
        """Highest order the construction can produce, None if unlimited."""
        if self.construction == "closed-form":
            return None
        return _series_file(self.construction_arg).bound


def parse_catalog(text: str) -> dict[str, ModelSpec]:
    lines = [ln.rstrip() for ln in text.splitlines()]
    if not lines or lines[0].split() != ["catalog", "version", "1"]:
        raise ModelError("catalog must open with 'catalog version 1'")
    out: dict[str, ModelSpec] = {}
    cur: Optional[dict] = None

    def finish() -> None:
        nonlocal cur
        if cur is None:
            return
        missing = [k for k in ("dimension", "algebra-dimension", "construction",
                               "replay", "replay-bound", "verify-min") if k not in cur]
        if missing:
            raise ModelError("model %s lacks %s" % (cur["name"], ", ".join(missing)))
        spec = ModelSpec(
            name=cur["name"], dimension=cur["dimension"],
            algebra_dimension=cur["algebra-dimension"],
            construction=cur["construction"][0], construction_arg=cur["construction"][1],
            replay_file=cur["replay"][0], replay_name=cur["replay"][1],
            replay_bound=cur["replay-bound"], verify_min=cur["verify-min"],
            has_parameter=cur.get("parameter", False),
            generators=cur.get("generators", []), brackets=cur.get("brackets", []),
            brackets_status=cur.get("brackets-status", "stated"),
            anchors=cur.get("anchors", []), notes=cur.get("notes", []))
        if len(spec.generators) != spec.algebra_dimension:
            raise ModelError("model %s lists %d generators for algebra dimension %d"
                             % (spec.name, len(spec.generators), spec.algebra_dimension))
        gnames = spec.generator_names()
        for i, j, _ in spec.brackets:
            if not (1 <= i < j <= len(gnames)):
                raise ModelError("model %s bracket indices (%d,%d) out of range"
                                 % (spec.name, i, j))
        out[spec.name] = spec
        cur = None

    env = {"theta": THETA}
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        key = toks[0]
        if key == "model":
            finish()
            cur = {"name": toks[1]}
            continue
        if cur is None:
            raise ModelError("line %d outside any model record: %r" % (lineno, line))
        if key == "end":
            finish()
        elif key in ("dimension", "algebra-dimension", "replay-bound", "verify-min"):
            cur[key] = int(toks[1])
        elif key == "parameter":
            if toks[1] != "theta":
                raise ModelError("only the theta parameter is supported")
            cur["parameter"] = True
        elif key == "construction":
            if toks[1] not in ("closed-form", "jet") or len(toks) != 3:
                raise ModelError("bad construction line %d: %r" % (lineno, line))
            cur["construction"] = (toks[1], toks[2])
        elif key == "replay":
            rest = line[len("replay"):].strip()
            fname, sep, mname = rest.partition("::")
            if not sep:
                raise ModelError("bad replay line %d: %r" % (lineno, line))
            cur["replay"] = (fname.strip(), mname.strip())
        elif key == "generator":
            rest = line[len("generator"):].strip()
            gname, sep, body = rest.partition(":")
            if not sep:
                raise ModelError("bad generator line %d: %r" % (lineno, line))
            comps: dict[str, str] = {}
            for piece in body.split(";"):
                comp, csep, expr = piece.partition("=")
                if not csep:
                    raise ModelError("bad generator component at line %d: %r"
                                     % (lineno, piece))
                comps[comp.strip()] = expr.strip()
            cur.setdefault("generators", []).append((gname.strip(), comps))
        elif key == "bracket":
            rest = line[len("bracket"):].strip()
            head, sep, combo = rest.partition("=")
            if not sep or not head.strip().startswith("[") or not head.strip().endswith("]"):
                raise ModelError("bad bracket line %d: %r" % (lineno, line))
            pair = head.strip()[1:-1].split(",")
            i = int(pair[0].strip().lstrip("e"))
            j = int(pair[1].strip().lstrip("e"))
            cur.setdefault("brackets", []).append((i, j, combo.strip()))
        elif key == "brackets-status":
            if toks[1] not in ("stated", "derived"):
                raise ModelError("brackets-status must be stated or derived")
            cur["brackets-status"] = toks[1]
        elif key == "anchor":
            rest = line[len("anchor"):].strip()
            left, sep, right = rest.partition(":")
            if not sep:
                raise ModelError("bad anchor line %d: %r" % (lineno, line))
            expo = tuple(int(t) for t in left.split())
            cur.setdefault("anchors", []).append((expo, parse_coeff(right.strip(), env)))
        elif key == "note":
            cur.setdefault("notes", []).append(line[len("note"):].strip())
        else:
            raise ModelError("unknown catalog directive %r at line %d" % (key, lineno))
    finish()
    return out


@lru_cache(maxsize=1)
def load_catalog() -> dict[str, ModelSpec]:
    return parse_catalog((DATA_DIR / "catalog.txt").read_text())


def get_model(name: str) -> ModelSpec:
    catalog = load_catalog()
    if name not in catalog:
        raise ModelUsageError("unknown model %r; catalog has: %s"
                              % (name, " ".join(sorted(catalog))))
    return catalog[name]


@lru_cache(maxsize=8)
def _series_file(fname: str) -> TruncatedSeries:
    return read_series((DATA_DIR / fname).read_text(), env={"theta": THETA})


@lru_cache(maxsize=8)
def _replayed(fname: str):
    report = run_branch_script(load_branch_script(DATA_DIR / fname))
    if not report.ok:
        raise ModelError("replay of %s failed: %s" % (fname, report.failure))
    return report


def model_series(name: str, order: int,
                 theta: Optional[Fraction] = None) -> TruncatedSeries:
    """The model's graphing function as an exact series with bound `order`."""
    spec = get_model(name)
    if theta is not None and not spec.has_parameter:
        raise ModelUsageError("model %s takes no parameter" % name)
    if order < 2:
        raise ModelUsageError("order must be at least 2")
    if spec.construction == "closed-form":
        return _CLOSED_FORMS[spec.construction_arg](order)
    stored = _series_file(spec.construction_arg)
    if order > stored.bound:
        raise ModelUsageError("model %s is known as a jet through order %d; "
                              "order %d is beyond the catalog data"
                              % (name, stored.bound, order))
    out = stored.truncate(order)
    if theta is not None:
        out = out.substitute_coeffs({THETA: ParamPoly.coerce(theta)})
    return out


def reference_series(emitted_name: str, bound: int) -> Optional[TruncatedSeries]:
    """The catalog's independent record of an emitted model's series.

    Looked up by the name a branch script emits; None when no catalog
    entry claims that name.  Script replay uses this as a transcription
    guard, so the result is capped at the order through which the tree
    pins the jet numerically.
    """
    for spec in load_catalog().values():
        if spec.replay_name == emitted_name:
            k = min(bound, spec.replay_bound)
            if spec.construction == "closed-form":
                return _CLOSED_FORMS[spec.construction_arg](k)
            stored = _series_file(spec.construction_arg)
            return stored.truncate(min(k, stored.bound))
    return None


# -- verification ----------------------------------------------------------------

@dataclass
class VerificationReport:
    model: str
    order: int
    theta: Optional[Fraction]
    tangency: list[tuple[str, int, bool]]          # generator, checked order, ok
    hessian: HessianReport
    bracket_results: list[tuple[int, int, str, bool]]
    brackets_status: str
    anchor_results: list[tuple[Expo, Coeff, Coeff, bool]]
    replay_bound: int
    replay_diffs: list[tuple[Expo, Coeff, Coeff]]
    origin_span_ok: bool
    notes: list[str]

    @property
    def verdict(self) -> bool:
        return (all(ok for _, _, ok in self.tangency)
                and self.hessian.rank1
                and all(ok for _, _, _, ok in self.bracket_results)
                and all(ok for _, _, _, ok in self.anchor_results)
                and not self.replay_diffs
                and self.origin_span_ok)

    def render(self) -> str:
        lines = ["model: %s" % self.model,
                 "order: %d" % self.order]
        if self.theta is not None:
            lines.append("theta: %s" % self.theta)
        for gname, through, ok in self.tangency:
            lines.append("tangency %s through order %d: %s"
                         % (gname, through, "ok" if ok else "RESIDUAL"))
        lines.append("hessian rank 1 through order %d: %s"
                     % (self.hessian.checked_through,
                        "ok" if self.hessian.rank1 else "FAILED"))
        for i, j, combo, ok in self.bracket_results:
            lines.append("bracket [e%d,e%d] = %s (%s): %s"
                         % (i, j, combo if combo else "0", self.brackets_status,
                            "ok" if ok else "MISMATCH"))
        for expo, want, got, ok in self.anchor_results:
            lines.append("anchor %s = %s: %s"
                         % (" ".join(str(k) for k in expo), want,
                            "ok" if ok else "MISMATCH (got %s)" % (got,)))
        lines.append("replay agreement through order %d: %s"
                     % (self.replay_bound,
                        "ok" if not self.replay_diffs else
                        "; ".join("%s stored %s replayed %s" % d for d in self.replay_diffs)))
        lines.append("origin span: %s" % ("ok" if self.origin_span_ok else "DEGENERATE"))
        for note in self.notes:
            lines.append("note: %s" % note)
        lines.append("verdict: %s" % ("pass" if self.verdict else "FAIL"))
        return "\n".join(lines) + "\n"


def _origin_span_full(fields: list[VectorField], n: int) -> bool:
    rows = []
    for f in fields:
        row = []
        for v in f.trans[:n]:
            q = v.as_rational() if isinstance(v, ParamPoly) else Fraction(v)
            if q is None:
                return False
            row.append(q)
        rows.append(row)
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        lead = rows[rank][col]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                q = rows[i][col] / lead
                rows[i] = [a - q * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank == n


def _replay_series(spec: ModelSpec, theta: Optional[Fraction]) -> TruncatedSeries:
    report = _replayed(spec.replay_file)
    if spec.replay_name not in report.models:
        raise ModelError("replay of %s emitted no model %r"
                         % (spec.replay_file, spec.replay_name))
    emitted = report.models[spec.replay_name]
    state = emitted.state
    state.ensure_order(spec.replay_bound)
    series = state.fjets.to_series(spec.replay_bound)
    if theta is not None:
        series = series.substitute_coeffs({THETA: ParamPoly.coerce(theta)})
    return series


def generator_combination(text: str, names: list[str],
                          fields: list[VectorField]) -> VectorField:
    """Evaluate a rational-linear combination of named generators."""
    esyms = {nm: branch_sym("combo_" + nm) for nm in names}

    def resolve(cname, index):
        if index is not None or cname not in esyms:
            raise ExprError("bracket combinations may only use generator names")
        return ParamPoly.symbol(esyms[cname])

    val = ParamPoly.coerce(parse_expr(text, resolve))
    coeffs = []
    for nm in names:
        c = val.coeff_of(esyms[nm], 1)
        q = c.as_rational()
        if q is None:
            raise ModelError("bracket combination %r is not rational-linear" % text)
        coeffs.append(q)
        val = val - c * ParamPoly.symbol(esyms[nm])
    if not val.is_zero:
        raise ModelError("bracket combination %r is not a generator combination" % text)
    return linear_combination(coeffs, fields)


def verify_model(name: str, order: int,
                 theta: Optional[Fraction] = None) -> VerificationReport:
    """Recompute every piece of catalog data for one model and compare.

    The series is expanded one order past `order` when the construction
    allows, so the tangency residual is checked through `order` itself.
    """
    spec = get_model(name)
    if order < spec.verify_min:
        raise ModelUsageError("model %s verifies from order %d; %d is below "
                              "the generator-check minimum"
                              % (name, spec.verify_min, order))
    data_bound = spec.data_bound()
    series_bound = order + 1 if data_bound is None else min(order + 1, data_bound)
    series = model_series(name, series_bound, theta)

    fields = spec.generator_fields(theta)
    tangency = []
    for (gname, _), f in zip(spec.generators, fields):
        res = tangency_residual(f, series)
        tangency.append((gname, series.bound - 1, res.is_zero))

    hess = check_hessian_rank1(series)

    names = spec.generator_names()
    bracket_results = []
    for i, j, combo in spec.brackets:
        got = lie_bracket(fields[i - 1], fields[j - 1])
        want = generator_combination(combo, names, fields)
        bracket_results.append((i, j, combo, got == want))

    anchor_results = []
    for expo, want in spec.anchors:
        if sum(expo) > series.bound:
            continue
        want_here = want
        if theta is not None and isinstance(want, ParamPoly):
            sub = want.substitute({THETA: ParamPoly.coerce(theta)})
            q = sub.as_rational()
            want_here = q if q is not None else sub
        got = series.coeff(expo)
        anchor_results.append((expo, want_here, got, c_eq(got, want_here)))

    replayed = _replay_series(spec, theta)
    compare = min(series.bound, spec.replay_bound)
    replay_diffs = []
    seen = set()
    for expo, c in series.truncate(compare).sorted_terms():
        seen.add(expo)
        rc = replayed.coeff(expo)
        if not c_eq(rc, c):
            replay_diffs.append((expo, c, rc))
    for expo, rc in replayed.truncate(compare).sorted_terms():
        if expo not in seen and not c_is_zero(rc):
            replay_diffs.append((expo, Fraction(0), rc))

    return VerificationReport(
        model=name, order=order, theta=theta,
        tangency=tangency, hessian=hess,
        bracket_results=bracket_results, brackets_status=spec.brackets_status,
        anchor_results=anchor_results,
        replay_bound=compare, replay_diffs=replay_diffs,
        origin_span_ok=_origin_span_full(fields, spec.dimension),
        notes=list(spec.notes))
