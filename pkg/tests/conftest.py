import numpy as np
import pytest

from toroidq import SystemParams

TWO_PI = 2 * np.pi


@pytest.fixture
def fig4():
    return SystemParams.from_mhz(kappa_ex=30, kappa_i=0.5, h=0, gamma=5.2,
                                 g_tw=100, E_p=10)


@pytest.fixture
def fig8():
    return SystemParams.from_mhz(kappa_ex=50, kappa_i=0.5, h=0, gamma=5.2, g_tw=100)


@pytest.fixture
def fig7_base():
    return SystemParams.from_mhz(kappa_ex=30, kappa_i=0.5, h=0, gamma=5.2, g_tw=100)


ACCEPTANCE_LINES = {}


def record_criterion(number, passed, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
