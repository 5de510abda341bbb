"""Command-line interface: output, file handling, and exit statuses."""
import shutil
import subprocess
from fractions import Fraction

import pytest

from hessrank1.cli import main
from hessrank1.models import model_series
from hessrank1.series import TruncatedSeries, write_series

F = Fraction


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- passing runs (exit 0) -------------------------------------------------------

def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--model", "cayley2", "--order", "5")
    assert code == 0
    assert out.rstrip().endswith("verdict: pass")


def test_verify_with_theta(capsys):
    code, out, _ = run(capsys, "verify", "--model", "s-theta", "--order", "7",
                       "--theta", "-2")
    assert code == 0
    assert "theta: -2" in out


def test_expand_writes_the_series(tmp_path, capsys):
    target = tmp_path / "cayley2.series"
    code, out, _ = run(capsys, "expand", "--model", "cayley2", "--order", "6",
                       "--out", str(target))
    assert code == 0
    assert out == ""
    assert target.read_text() == write_series(model_series("cayley2", 6))


def test_hessian_on_an_expanded_model(tmp_path, capsys):
    f = tmp_path / "m3.series"
    f.write_text(write_series(model_series("merker3", 7)))
    code, out, _ = run(capsys, "hessian", "--in", str(f))
    assert code == 0
    assert "rank1: yes" in out
    assert "checked-through-order: 5" in out


def test_hessian_accepts_a_symbolic_family(tmp_path, capsys):
    f = tmp_path / "family.series"
    f.write_text(write_series(model_series("s-theta", 8)))
    code, out, _ = run(capsys, "hessian", "--in", str(f))
    assert code == 0
    assert "rank1: yes" in out


def test_symmetry_reports_the_dimension(tmp_path, capsys):
    f = tmp_path / "c2.series"
    f.write_text(write_series(model_series("cayley2", 10)))
    code, out, _ = run(capsys, "symmetry", "--in", str(f), "--order", "9")
    assert code == 0
    assert "dimension: 4" in out
    assert "stabilized: yes" in out


def test_symmetry_with_theta_substitution(tmp_path, capsys):
    f = tmp_path / "family.series"
    f.write_text(write_series(model_series("s-theta", 9)))
    code, out, _ = run(capsys, "symmetry", "--in", str(f), "--order", "8",
                       "--theta", "1")
    assert code == 0
    assert "dimension: 2" in out


def test_bracket_table(capsys):
    code, out, _ = run(capsys, "bracket", "--model", "cayley2")
    assert code == 0
    assert out.startswith("model: cayley2\n")
    assert "[e1,e2] = e1 : ok" in out
    assert "MISMATCH" not in out


def test_classify_replays_the_packaged_tree(data_dir, capsys):
    code, out, _ = run(capsys, "classify", "--script", str(data_dir / "tree-n2.txt"))
    assert code == 0
    assert out.rstrip().endswith("result: ok (30 expectations checked, 3 models emitted)")


def test_classify_output_is_deterministic(data_dir, tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for target in (a, b):
        code, _, _ = run(capsys, "classify", "--script",
                         str(data_dir / "tree-n4.txt"), "--out", str(target))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


# -- failing checks (exit 1) -----------------------------------------------------

def test_hessian_failure_exits_one(tmp_path, capsys):
    s = TruncatedSeries(2, 4, {(2, 0): F(1, 2), (0, 2): F(1, 2)})
    f = tmp_path / "sphere.series"
    f.write_text(write_series(s))
    code, out, _ = run(capsys, "hessian", "--in", str(f))
    assert code == 1
    assert "rank1: no" in out
    assert "failing-minor: (y,y) at monomial 0 0" in out


def test_classify_failure_exits_one(data_dir, tmp_path, capsys):
    bad = tmp_path / "bad-tree.txt"
    text = (data_dir / "tree-n2.txt").read_text()
    bad.write_text(text.replace("expect-forced F[5,0] = 20/9",
                                "expect-forced F[5,0] = 7", 1))
    code, out, _ = run(capsys, "classify", "--script", str(bad))
    assert code == 1
    assert "result: FAILED:" in out
    assert "F[5,0] is 20/9, expected 7" in out


# -- usage errors (exit 2) -------------------------------------------------------

def test_verify_below_minimum_order(capsys):
    code, _, err = run(capsys, "verify", "--model", "merker4-plus", "--order", "3")
    assert code == 2
    assert err.startswith("usage error: ")
    assert "verifies from order" in err


def test_unknown_model(capsys):
    code, _, err = run(capsys, "expand", "--model", "nosuch", "--order", "5")
    assert code == 2
    assert "unknown model 'nosuch'" in err


def test_missing_required_flag(capsys):
    code, _, err = run(capsys, "verify", "--order", "5")
    assert code == 2
    assert "--model" in err


def test_unreadable_input_file(tmp_path, capsys):
    code, _, err = run(capsys, "hessian", "--in", str(tmp_path / "absent.series"))
    assert code == 2
    assert err.startswith("error: ")


def test_malformed_theta(capsys):
    code, _, err = run(capsys, "verify", "--model", "s-theta", "--order", "7",
                       "--theta", "x/y")
    assert code == 2
    assert "not a rational" in err


def test_symbolic_series_needs_theta_for_symmetry(tmp_path, capsys):
    f = tmp_path / "family.series"
    f.write_text(write_series(model_series("s-theta", 9)))
    code, _, err = run(capsys, "symmetry", "--in", str(f), "--order", "8")
    assert code == 2
    assert "supply --theta" in err


def test_no_subcommand_is_a_usage_error(capsys):
    code, _, _ = run(capsys)
    assert code == 2


# -- the installed entry point ---------------------------------------------------

def test_console_script_round_trip(tmp_path):
    exe = shutil.which("hessrank1")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run([exe, "verify", "--model", "prop214", "--order", "5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.rstrip().endswith("verdict: pass")
