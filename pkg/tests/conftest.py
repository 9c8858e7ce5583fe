from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from superaut.superalgebra import Parameters

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def p22():
    return Parameters(5, 2, (1, 1))


@pytest.fixture(scope="session")
def p21():
    return Parameters(5, 2, (2, 1))


@pytest.fixture(scope="session")
def p33():
    return Parameters(5, 3, (1, 1, 1))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
