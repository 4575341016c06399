import pytest

from pdc_decoy.core_model import GYS
from pdc_decoy.core_model import transmittance

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def gys():
    return GYS


@pytest.fixture
def eta50():
    return transmittance(GYS.alpha, 50.0, GYS.eta_B)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
