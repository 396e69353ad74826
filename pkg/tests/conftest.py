import numpy as np
import pytest

from nvne.hermitian import random_density_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def make_states(rng, dims=(2, 3, 4), per_dim=3):
    out = []
    for d in dims:
        out += [random_density_matrix(d, rng) for _ in range(per_dim)]
    return out
