import numpy as np
import pytest

from eprsim.linalg import random_density, random_unitary


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def random_states(rng):
    """Factory of random two-qubit (or other-dimension) density operators."""

    def make(n, dim=4):
        return [random_density(dim, rng) for _ in range(n)]

    return make


@pytest.fixture
def random_unitaries(rng):
    def make(n, dim=4):
        return [random_unitary(dim, rng) for _ in range(n)]

    return make
