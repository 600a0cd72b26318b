import numpy as np
import pytest

from aqclust import DataSet, gen_blobs

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def blobs26():
    return gen_blobs(2, 6, ((-3.0, 0.0), (1.0, 0.0)), 0.3, seed=7)


@pytest.fixture
def line4():
    return DataSet(np.array([[-2.0, -1.0, 1.0, 2.0]]))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
