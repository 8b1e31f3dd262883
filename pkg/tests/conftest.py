import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from mapfluct import solvers, taboo, zoo  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def bd12():
    return zoo.bd(1.0, 2.0)


@pytest.fixture(scope="session")
def bd12_killed():
    return zoo.bd(1.0, 2.0, 1.0)


@pytest.fixture(scope="session")
def random_models():
    return zoo.random_models()


@pytest.fixture(scope="session")
def mc_models():
    return zoo.mc_models()


def solved(model, K=30):
    fund = solvers.solve_lattice(model)
    return fund, taboo.build_tables(model, fund, K)


@pytest.fixture(scope="session")
def solve_with_tables():
    return solved


def assert_close(a, b, tol):
    a, b = np.asarray(a, float), np.asarray(b, float)
    assert np.max(np.abs(a - b)) <= tol, f"max diff {np.max(np.abs(a - b)):.3e} > {tol}"
