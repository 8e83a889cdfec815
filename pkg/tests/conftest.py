import numpy as np
import pytest


def random_rate(rng, d, scale=1.0, sparsity=0.0):
    Q = rng.exponential(scale, size=(d, d))
    if sparsity:
        Q *= rng.random((d, d)) >= sparsity
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return Q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
