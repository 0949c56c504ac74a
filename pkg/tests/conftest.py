from __future__ import annotations

import pathlib
import sys

import pytest
from hypothesis import strategies as st

from cosolve.frontend import parse_program
from cosolve.terms import App, Var

ROOT = pathlib.Path(__file__).resolve().parent.parent
PROGRAMS = ROOT / "programs"

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))


def load(name: str):
    return parse_program((PROGRAMS / name).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def resistors():
    return load("resistors.cfl")


@pytest.fixture(scope="session")
def add_program():
    return load("add.cfl")


# random first-order terms over a tiny signature
TERM_VARS = [Var(i, n) for i, n in enumerate("XYZUVW", start=1)]
SYMBOLS = {"a": 0, "b": 0, "f": 1, "g": 2, "h": 3}


def terms(max_depth: int = 5):
    leaves = st.sampled_from(TERM_VARS) | st.sampled_from([App("a"), App("b")])

    def extend(children):
        return st.one_of(
            st.builds(lambda x: App("f", (x,)), children),
            st.builds(lambda x, y: App("g", (x, y)), children, children),
            st.builds(lambda x, y, z: App("h", (x, y, z)), children, children, children),
        )

    return st.recursive(leaves, extend, max_leaves=2 ** max_depth).filter(lambda t: depth(t) <= max_depth)


def depth(t) -> int:
    if isinstance(t, App) and t.args:
        return 1 + max(depth(a) for a in t.args)
    return 0


# acceptance criteria record their outcome here; printed at the end of the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[n]
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
