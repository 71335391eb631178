import numpy as np
import pytest

from chain_escape import LatticeParams, LatticeState

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def ref():
    return LatticeParams(a=1.0, omega=1.0, omega0=1.0, f=1.0)


@pytest.fixture
def free():
    return LatticeParams(a=1.0, omega=1.0, omega0=1.0, f=0.0)


def single_site(half_width, k=0, height=1.0):
    q = np.zeros(2 * half_width + 1)
    q[half_width + k] = height
    return LatticeState.symmetric(half_width, q=q)
