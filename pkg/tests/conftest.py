from pathlib import Path

import pytest

from hessrank1.branch import load_branch_script, run_branch_script

DATA = Path(__file__).parent.parent / "src" / "hessrank1" / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def replays() -> dict:
    """Each shipped tree replayed once per test session."""
    out = {}
    for name in ("tree-n2", "tree-n3", "tree-n4"):
        out[name] = run_branch_script(load_branch_script(DATA / ("%s.txt" % name)))
    return out
