import numpy as np
import pytest

from squidlind.model import DeviceInputs, derive_params
from squidlind.operators import FockSpace


@pytest.fixture(scope="session")
def params():
    """Default device at half flux quantum, g = 1.8."""
    return derive_params(DeviceInputs())


@pytest.fixture(scope="session")
def small_space():
    return FockSpace(16, 4)


def random_density(dim, rng):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = z @ z.conj().T
    return rho / np.trace(rho)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
