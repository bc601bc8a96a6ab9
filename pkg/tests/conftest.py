import numpy as np
import pytest

from stormspar.rng import SeededRng


@pytest.fixture
def rng():
    return SeededRng(seed=20190101, stream_id=0)


@pytest.fixture
def nprng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
