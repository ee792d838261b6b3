import numpy as np
import pytest

from fowtsim.dynamics import Plant
from fowtsim.params import reference_params

# lines collected by the acceptance module and echoed after the run
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def params():
    return reference_params()


@pytest.fixture(scope="session")
def plant(params):
    return Plant(params)


@pytest.fixture(scope="session")
def mats(plant):
    return plant.mats


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
