import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mltplab import core
from mltplab.norms import L1

settings.register_profile(
    "repo", derandomize=True, deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@pytest.fixture
def matrix_algebra():
    return core.convolution_algebra(2, [1.0, 1.0], L1)


@pytest.fixture
def pointwise2():
    return core.pointwise_algebra(2)


@pytest.fixture
def scalar():
    return core.scalar_algebra(1.0)


def mat_to_vec(A):
    # convolution coordinates: E_xy -> x * size + y
    return np.asarray(A, dtype=complex).ravel()


def vec_to_mat(v):
    n = int(round(len(v) ** 0.5))
    return np.asarray(v).reshape(n, n)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
