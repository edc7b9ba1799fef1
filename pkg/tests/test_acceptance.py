"""End-to-end acceptance suite.

Runs every criterion at its pinned tolerance and prints one pass/fail line
per criterion (visible with ``pytest -s`` or on failure). The same checks
back the ``ldpsim acceptance`` CLI subcommand.
"""

import pytest

from ldpsim.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    result = run_criterion(number)
    print(result.line())
    assert result.passed, result.line()
