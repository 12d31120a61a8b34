"""Acceptance criteria, one test each.

Each test prints a ``[PASS]``/``[FAIL]`` line with the measured values behind
it; the lines are also collected into the pytest terminal summary. Running
this file directly prints the same report without pytest.
"""

import sys

import pytest

from floquet_qi.acceptance import CRITERIA, run_one

REPORT = []


def _report(res):
    lines = [res.line()] + ["      " + d for d in res.details]
    REPORT.append((res.number, lines))
    print("\n".join(lines))


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, len(CRITERIA) + 1)])
def test_criterion(criterion):
    res = run_one(criterion)
    _report(res)
    assert res.passed, "\n".join([res.line()] + res.details)


if __name__ == "__main__":
    failed = 0
    for fn in CRITERIA:
        res = run_one(fn)
        _report(res)
        failed += not res.passed
    print(f"{len(CRITERIA) - failed}/{len(CRITERIA)} criteria passed")
    sys.exit(1 if failed else 0)
