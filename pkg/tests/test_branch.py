"""Classification-script parsing and replay."""
import pytest

from hessrank1.branch import (BranchScript, ExpectationFailed, ReplayReport,
                              ScriptError, load_branch_script,
                              parse_branch_script, run_branch_script)

HEADER = "tree t\ndimension 2\nbound 8\nstart quadric\n"


def run_text(text, data_dir=None):
    return run_branch_script(parse_branch_script(text), data_dir=data_dir)


# -- parsing ---------------------------------------------------------------------

def test_parse_packaged_tree(data_dir):
    script = load_branch_script(data_dir / "tree-n2.txt")
    assert isinstance(script, BranchScript)
    assert script.name == "n2"
    assert script.dimension == 2
    assert script.bound == 11
    assert script.start_kind == "quadric"


@pytest.mark.parametrize("text,message", [
    (HEADER + "branch a {\nassume-zero F[2,1]\n", "unclosed branch block"),
    ("tree t\nbound 8\nstart quadric\n", "does not declare a dimension"),
    ("tree t\ndimension 2\nstart quadric\n", "does not declare a bound"),
    ("tree t\ndimension 2\nbound 8\n", "does not declare a start state"),
    (HEADER + "branch a\n", "must end with '{'"),
    (HEADER + "}\n", "unmatched '}'"),
    ("tree t\ndimension two\nbound 8\nstart quadric\n", "malformed dimension"),
    ("tree t\ndimension 2\nbound 8\nstart elsewhere\n", "start wants"),
])
def test_parse_rejects_malformed_scripts(text, message):
    with pytest.raises(ScriptError, match=message):
        parse_branch_script(text)


def test_comments_and_blank_lines_are_ignored():
    script = parse_branch_script(
        "# leading comment\n\ntree t  # trailing\ndimension 2\nbound 8\n"
        "start quadric\n\n# done\n")
    assert script.name == "t"
    assert script.body == []


def test_unknown_step_fails_at_replay_time():
    script = parse_branch_script(HEADER + "frobnicate F[2,1]\n")
    with pytest.raises(ScriptError, match="unknown step 'frobnicate'"):
        run_branch_script(script)


# -- replay of the packaged trees ------------------------------------------------

def test_empty_body_echoes_initial_state():
    report = run_text(HEADER)
    assert report.ok
    assert report.expectations == 0
    assert report.lines[-1] == "result: ok (0 expectations checked, 0 models emitted)"
    assert report.render().startswith("tree t\ndimension 2\nbound 8\nstart quadric\n")


TREE_FACTS = [
    ("tree-n2", 30, {"cayley2", "s-theta", "prop214"}),
    ("tree-n3", 24, {"merker3"}),
    ("tree-n4", 25, {"merker4-plus", "merker4-minus"}),
]


@pytest.mark.parametrize("tree,expectations,models", TREE_FACTS)
def test_packaged_trees_replay_clean(replays, tree, expectations, models):
    report = replays[tree]
    assert report.ok, report.failure
    assert report.expectations == expectations
    assert set(report.models) == models
    assert report.lines[-1] == ("result: ok (%d expectations checked, "
                                "%d models emitted)" % (expectations, len(models)))


@pytest.mark.parametrize("tree,expectations,models", TREE_FACTS)
def test_every_emit_is_checked_against_the_catalog(replays, tree, expectations, models):
    text = replays[tree].render()
    assert text.count(":: recorded, matches catalog") == len(models)
    assert ":: recorded\n" not in text    # no unchecked emits


def test_n2_reports_the_cylinder_verdict(replays):
    assert ("step expect-cylinder-through 8 :: cylinder verdict: every jet "
            "involving the fibre variables vanishes through order 8"
            ) in replays["tree-n2"].render()


def test_n3_confirms_both_contradictions(replays):
    text = replays["tree-n3"].render()
    assert "confirmed (equation (5, 1, 0), coefficient -1/72 on T[3])" in text
    assert ("confirmed (equation (6, 0, 1), coefficient 1/270 on T[1]; "
            "F[7,0,1] assigned 56/3 but required 16)") in text


def test_n4_confirms_the_fibre_contradiction(replays):
    assert ("confirmed (equation (6, 0, 0, 1), coefficient -1/288 on T[4])"
            ) in replays["tree-n4"].render()


def test_replay_is_deterministic(data_dir):
    script = load_branch_script(data_dir / "tree-n2.txt")
    first = run_branch_script(script, data_dir=data_dir).render()
    second = run_branch_script(load_branch_script(data_dir / "tree-n2.txt"),
                               data_dir=data_dir).render()
    assert first == second


# -- failure reporting -----------------------------------------------------------

def test_wrong_expect_forced_fails_with_both_values(data_dir):
    text = (data_dir / "tree-n2.txt").read_text()
    corrupted = text.replace("expect-forced F[5,0] = 20/9",
                             "expect-forced F[5,0] = 7", 1)
    assert corrupted != text
    report = run_text(corrupted, data_dir=data_dir)
    assert not report.ok
    assert "F[5,0] is 20/9, expected 7" in report.failure
    assert report.lines[-1].startswith("result: FAILED: ")


def test_emit_model_cross_check_catches_a_wrong_state(data_dir):
    text = (data_dir / "tree-n2.txt").read_text()
    corrupted = text.replace("emit-model prop214", "emit-model cayley2", 1)
    assert corrupted != text
    report = run_text(corrupted, data_dir=data_dir)
    assert not report.ok
    assert "disagrees with the catalog record of 'cayley2'" in report.failure


def test_failed_replay_still_renders(data_dir):
    text = (data_dir / "tree-n2.txt").read_text()
    report = run_text(text.replace("expect-dimension 4", "expect-dimension 9", 1),
                      data_dir=data_dir)
    assert not report.ok
    assert "symmetry dimension is 4" in report.failure
    rendered = report.render()
    assert rendered.endswith("result: FAILED: %s\n" % report.failure)


def test_expectation_failure_is_not_an_exception(data_dir):
    script = parse_branch_script(
        (data_dir / "tree-n2.txt").read_text().replace(
            "expect-forced F[7,1] = 6*theta", "expect-forced F[7,1] = 0", 1))
    report = run_branch_script(script, data_dir=data_dir)   # must not raise
    assert isinstance(report, ReplayReport)
    assert not report.ok
    assert "expected 0" in report.failure
