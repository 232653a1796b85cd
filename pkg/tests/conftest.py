import numpy as np
import pytest

from bbmlab.geometry import Box, Disk, Interval, sample_quadrature

# populated by the acceptance tests; echoed after the run so the
# per-criterion verdict lines survive pytest's output capture
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def unit_interval():
    return Interval(0.0, 1.0)


@pytest.fixture(scope="session")
def unit_interval_grid(unit_interval):
    return sample_quadrature(unit_interval, 1.0 / 64)


@pytest.fixture(scope="session")
def unit_square():
    return Box((0.0, 0.0), (1.0, 1.0))


@pytest.fixture(scope="session")
def unit_square_grid(unit_square):
    return sample_quadrature(unit_square, 1.0 / 16)


@pytest.fixture(scope="session")
def unit_disk():
    return Disk((0.0, 0.0), 1.0)
