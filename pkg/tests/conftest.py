import os

import pytest
from hypothesis import HealthCheck, settings

from ordres.dynlab.presets import quadratic_map, haar_map, square_map

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def haar():
    return haar_map(3)


@pytest.fixture(scope="session")
def quadratic():
    return quadratic_map(3)


@pytest.fixture(scope="session")
def square():
    return square_map(3)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
