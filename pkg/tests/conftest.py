import numpy as np
import pytest

from gmbeso import sea_preset


@pytest.fixture
def sea20():
    return sea_preset("ms20")


@pytest.fixture
def sea1():
    return sea_preset("ms1")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
