import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""

    def record(k: int, ok: bool, detail: str):
        line = f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _LINES[k] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_LINES):
            terminalreporter.write_line(_LINES[k])
