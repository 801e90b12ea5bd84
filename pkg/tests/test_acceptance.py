"""Acceptance gate: the fourteen end-to-end checks at their stated tolerances.

Each check prints a ``[PASS]``/``[FAIL]`` line; the lines are also
collected and repeated in the terminal summary (see ``conftest.py``).
"""

from __future__ import annotations

import json

import pytest

from wpoincare import reproduce

RESULTS: dict[int, str] = {}


@pytest.mark.acceptance
@pytest.mark.parametrize("number", range(1, len(reproduce.ALL) + 1))
def test_criterion(number):
    check = reproduce.run_all([number])[0]
    RESULTS[number] = check.line()
    print(check.line())
    assert check.passed, json.dumps(check.to_dict(), default=str, indent=1)
