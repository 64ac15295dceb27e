from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from itp import ItpInstance

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def one_by_one():
    return ItpInstance.from_bounds([[[3, 5]]], [[1, 2]], [[1, 2]])


@pytest.fixture
def two_by_one():
    """Fixed costs (1, 3), supplies [1, 2] each, demand [2, 3]."""
    return ItpInstance.from_bounds([[1], [3]], [[1, 2], [1, 2]], [[2, 3]])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
