"""Release criteria, one test per criterion.

Each check's PASS/FAIL line is printed in the terminal summary (see
conftest.py) so it shows up even when output is captured.
"""

import pytest

from chainwalk.acceptance import CHECKS

RESULTS = {}


@pytest.mark.parametrize("check", CHECKS, ids=lambda c: c.__name__)
def test_criterion(check):
    res = check()
    RESULTS[res.number] = res.line()
    print(res.line())
    assert res.passed, res.line()
