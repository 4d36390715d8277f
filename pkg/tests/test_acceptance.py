"""Statistical acceptance suite: one PASS/FAIL line per criterion.

Slow (several minutes on one core). Lines are printed straight to the
terminal and repeated in the session summary.
"""
import pytest

from dimcons.acceptance import CRITERIA

LINES = {}


@pytest.mark.parametrize("k", range(1, len(CRITERIA) + 1), ids=lambda k: f"criterion_{k}")
def test_criterion(k, capsys):
    result = CRITERIA[k - 1](seed=0)
    LINES[k] = result.line()
    with capsys.disabled():
        print("\n" + LINES[k])
    assert result.passed, LINES[k]
