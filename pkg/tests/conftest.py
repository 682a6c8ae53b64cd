import pytest

from qlat.lattice_core import PeriodPoint, fixture_L5, fixture_U3
from qlat.cli_harness.config import data_path

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def L5():
    return fixture_L5()


@pytest.fixture(scope="session")
def U3():
    return fixture_U3()


@pytest.fixture(scope="session")
def pt(L5):
    return PeriodPoint.load(L5, data_path("L5_point.txt"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
