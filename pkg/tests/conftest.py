import sys

import numpy as np
import pytest

from rstc import TimeGrid


@pytest.fixture
def unit_grid():
    return TimeGrid.uniform(0.0, 1.0, 101)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def constant_curves(values, n=11):
    return np.array([[float(v)] * n for v in values])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
