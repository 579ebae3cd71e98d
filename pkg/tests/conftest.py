"""Shared fixtures.

The acceptance tests record one line per criterion through the ``criterion``
fixture; the lines are printed together at the end of the session.
"""

import pytest

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    def record(number: int, passed: bool, detail: str) -> bool:
        previous = _ACCEPTANCE.get(number)
        if previous is not None:
            passed = passed and previous[0]
            detail = f"{previous[1]}; {detail}"
        _ACCEPTANCE[number] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
