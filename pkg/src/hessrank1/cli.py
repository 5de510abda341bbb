"""Command-line front end.

Subcommands mirror the library surface: ``expand`` writes a model's
Taylor series, ``verify`` recomputes one model's catalog data,
``hessian`` and ``symmetry`` analyze a series file, ``bracket`` prints a
model's commutator table, and ``classify`` replays a branch script.

Exit status: 0 when the requested check passes, 1 when a verification or
expectation fails, 2 on usage errors or unreadable inputs.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .affine import lie_bracket
from .branch import ScriptError, load_branch_script, run_branch_script
from .equivalence import BookkeepingError
from .exprparse import ExprError
from .hessian import check_hessian_rank1
from .models import (THETA, ModelError, ModelUsageError,
                     generator_combination, get_model, model_series,
                     verify_model)
from .poly import ParamPoly, SolveError
from .series import SeriesError, TruncatedSeries, read_series, write_series
from .symmetry import solve_symmetry


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError("not a rational: %r" % text) from e


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _read_series_file(path: str, theta: Optional[Fraction]) -> TruncatedSeries:
    s = read_series(Path(path).read_text(), env={"theta": THETA})
    if theta is not None:
        s = s.substitute_coeffs({THETA: ParamPoly.coerce(theta)})
    return s


def _cmd_expand(args) -> int:
    s = model_series(args.model, args.order, args.theta)
    _emit(write_series(s), args.out)
    return 0


def _cmd_verify(args) -> int:
    rep = verify_model(args.model, args.order, args.theta)
    _emit(rep.render(), args.out)
    return 0 if rep.verdict else 1


def _cmd_hessian(args) -> int:
    s = _read_series_file(args.infile, args.theta)
    rep = check_hessian_rank1(s)
    _emit(rep.render(), args.out)
    return 0 if rep.rank1 else 1


def _cmd_symmetry(args) -> int:
    s = _read_series_file(args.infile, args.theta)
    for c in s.terms.values():
        if isinstance(c, ParamPoly):
            raise ModelUsageError("series has symbolic coefficients; "
                                  "supply --theta to fix them")
    rep = solve_symmetry(s, args.order)
    _emit(rep.render(), args.out)
    return 0


def _cmd_bracket(args) -> int:
    spec = get_model(args.model)
    if args.theta is not None and not spec.has_parameter:
        raise ModelUsageError("model %s has no parameter" % spec.name)
    fields = spec.generator_fields(args.theta)
    names = spec.generator_names()
    lines = ["model: %s" % spec.name,
             "brackets: %s" % spec.brackets_status]
    all_ok = True
    for i, j, combo in spec.brackets:
        got = lie_bracket(fields[i - 1], fields[j - 1])
        want = generator_combination(combo, names, fields)
        ok = got == want
        all_ok = all_ok and ok
        lines.append("[e%d,e%d] = %s : %s" % (i, j, combo,
                                              "ok" if ok else "MISMATCH"))
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if all_ok else 1


def _cmd_classify(args) -> int:
    script = load_branch_script(Path(args.script))
    rep = run_branch_script(script)
    _emit(rep.render(), args.out)
    return 0 if rep.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hessrank1",
        description="Expand, verify, and classify the rank-1 affinely "
                    "homogeneous hypersurface models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, fn, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--out", metavar="FILE",
                       help="write output here instead of stdout")
        return p

    p = command("expand", _cmd_expand, "write a model's Taylor series")
    p.add_argument("--model", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--theta", type=_fraction, metavar="P/Q")

    p = command("verify", _cmd_verify,
                "recompute one model's catalog data and compare")
    p.add_argument("--model", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--theta", type=_fraction, metavar="P/Q")

    p = command("hessian", _cmd_hessian,
                "check a series file for Hessian rank 1")
    p.add_argument("--in", dest="infile", metavar="FILE", required=True)
    p.add_argument("--theta", type=_fraction, metavar="P/Q")

    p = command("symmetry", _cmd_symmetry,
                "solve the affine symmetry algebra of a series file")
    p.add_argument("--in", dest="infile", metavar="FILE", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--theta", type=_fraction, metavar="P/Q")

    p = command("bracket", _cmd_bracket,
                "print and check a model's commutator table")
    p.add_argument("--model", required=True)
    p.add_argument("--theta", type=_fraction, metavar="P/Q")

    p = command("classify", _cmd_classify, "replay a branch script")
    p.add_argument("--script", metavar="FILE", required=True)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    try:
        return args.func(args)
    except ModelUsageError as e:
        print("usage error: %s" % e, file=sys.stderr)
        return 2
    except (ModelError, ScriptError, SeriesError, ExprError, SolveError,
            BookkeepingError, OSError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
