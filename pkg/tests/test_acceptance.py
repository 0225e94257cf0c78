"""Every acceptance criterion at its stated tolerance.

Each test prints one ``[PASS]``/``[FAIL]`` line; the lines are also collected
and repeated in the terminal summary so they show up without ``-s``.
"""
import pytest

from ntoslab import acceptance

REPORT = []


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    result = acceptance.CRITERIA[number]()
    line = f"[{'PASS' if result.passed else 'FAIL'}] {result.number}. {result.name}: {result.detail}"
    REPORT.append(line)
    print(line)
    assert result.passed, line
