from __future__ import annotations

import numpy as np
import pytest

# One line per acceptance criterion, echoed after the run summary so the
# verdicts stay visible even though pytest captures test stdout.
_criterion_lines: list[str] = []


def report_criterion(line: str) -> None:
    """Record (and print) a one-line acceptance-criterion verdict."""
    print(line)
    _criterion_lines.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
