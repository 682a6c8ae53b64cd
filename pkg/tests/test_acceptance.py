"""Acceptance criteria 1-10, one pass/fail line each.

Run with pytest (`-m "not slow"` skips criterion 5) or directly:
`python tests/test_acceptance.py [numbers...]`.
"""

import sys

import pytest

from qlat.cli_harness.acceptance import CRITERIA, SLOW, format_line, run_criterion

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []


def _marks(k):
    return [pytest.mark.slow] if k in SLOW else []


@pytest.mark.parametrize("number", [pytest.param(k, marks=_marks(k), id=f"criterion{k:02d}") for k in CRITERIA])
def test_criterion(number):
    res = run_criterion(number)
    line = format_line(res)
    print(line)
    ACCEPTANCE_LINES.append((number, line))
    assert res.passed, line


if __name__ == "__main__":
    picked = [int(a) for a in sys.argv[1:]] or sorted(CRITERIA)
    failed = 0
    for k in picked:
        res = run_criterion(k)
        print(format_line(res), flush=True)
        failed += not res.passed
    sys.exit(1 if failed else 0)
