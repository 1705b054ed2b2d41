import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from meshbench.shapes import blob, grid, icosphere

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sphere3():
    return icosphere(3)


@pytest.fixture(scope="session")
def small_blob():
    return blob(3)


@pytest.fixture(scope="session")
def mid_blob():
    return blob(4)


@pytest.fixture(scope="session")
def plane():
    return grid(12)


def random_perm(n, seed):
    return np.random.default_rng(seed).permutation(n)
