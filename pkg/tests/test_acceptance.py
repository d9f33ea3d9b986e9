"""One test per acceptance criterion.

Each prints its pass/fail line with the measured values; the lines are also
collected and repeated in the terminal summary (see ``conftest.py``).
"""
import pytest

from pmcsurf.verify import CHECKS, run_check

ACCEPTANCE_LINES = []


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number):
    result = run_check(number, seed=42)
    lines = [result.line(), *result.details()]
    ACCEPTANCE_LINES.extend(lines)
    print("\n".join(lines))
    assert result.seconds < 60.0, f"criterion {number} took {result.seconds:.1f}s"
    assert result.passed, "\n".join(lines)
