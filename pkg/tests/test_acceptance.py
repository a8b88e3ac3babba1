"""One test per acceptance criterion.

Each test prints a ``[PASS]``/``[FAIL]`` line; the lines are repeated in the
terminal summary so they show up without ``-s``.
"""
import pytest

from cavitycat import acceptance

RESULT_LINES = []


@pytest.mark.parametrize("crit", acceptance.CRITERIA, ids=lambda c: c.__name__)
def test_criterion(crit):
    res = crit()
    line = f"{res.line()} {acceptance._jsonable(res.details)}"
    RESULT_LINES.append(line)
    print(line)
    assert res.passed, line
