import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ringmix import WalkParams  # noqa: E402

#: (criterion number, passed, detail) lines collected by the acceptance suite.
ACCEPTANCE_LINES = []


@pytest.fixture
def default_params():
    return WalkParams(0.5, 0.25, 0.25)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number, ok, detail in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {detail}")
