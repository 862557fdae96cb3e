import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from reclab.rng import make_rng, random_density, random_hermitian, random_matrix

settings.register_profile(
    "reclab", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("reclab")


@pytest.fixture
def rng():
    return make_rng(1234)


def density(seed, n, rank=None):
    return random_density(make_rng(seed), n, rank)


def hermitian(seed, n):
    return random_hermitian(make_rng(seed), n)


def matrix(seed, rows, cols=None):
    return random_matrix(make_rng(seed), rows, cols)


def diag(*xs):
    return np.diag(np.asarray(xs, dtype=complex))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
