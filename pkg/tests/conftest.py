import math

import numpy as np
import pytest

from dimwit import fixtures

GAMMA = 0.5 + 1 / (2 * math.sqrt(2))


def h2(p):
    """Binary entropy written out independently of the package."""
    if p in (0, 1):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


@pytest.fixture
def two_state():
    return fixtures.two_state_table()


@pytest.fixture
def chsh():
    return fixtures.chsh_table()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
