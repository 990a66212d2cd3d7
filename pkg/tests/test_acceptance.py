"""Acceptance gate: every top-level criterion must pass at full size.

Each criterion in ``saltlab.suite.ALL_CRITERIA`` becomes one test case, so a
``pytest -v`` run prints one PASSED/FAILED line per criterion.  Tolerances are
pinned inside ``saltlab.suite``; this file intentionally adds none of its own.
"""

import pytest

from saltlab.suite import ALL_CRITERIA


@pytest.mark.parametrize("criterion", ALL_CRITERIA,
                         ids=[c.__name__.removeprefix("check_")
                              for c in ALL_CRITERIA])
def test_criterion(criterion):
    result = criterion()
    assert result.passed, f"{result.name}: {result.detail}"
