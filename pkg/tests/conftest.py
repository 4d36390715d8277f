import os

import pytest
from hypothesis import settings, strategies as st

from dimcons.groups import FreeGroup, ReducedWord, free_reduce

os.environ.setdefault("DIMCONS_THREADS", "1")

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

F2 = FreeGroup(2)
F3 = FreeGroup(3)


def raw_letters(rank: int, max_size: int = 64):
    nonzero = st.integers(1, rank).flatmap(lambda k: st.sampled_from((k, -k)))
    return st.lists(nonzero, max_size=max_size)


def words(rank: int = 2, max_size: int = 24):
    g = FreeGroup(rank)
    return raw_letters(rank, max_size).map(lambda xs: ReducedWord(free_reduce(xs), g))


@pytest.fixture
def f2():
    return F2


@pytest.fixture
def f3():
    return F3


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(LINES):
            terminalreporter.write_line(LINES[k])
