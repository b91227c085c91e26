import numpy as np
import pytest

from expsel import Dataset, ModelSubset


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_instance(seed, n=40, p=4, beta=None, sigma=1.0, tau_shift=0.0):
    """Small noisy regression instance with known coefficients."""
    rng = np.random.default_rng(seed)
    if beta is None:
        beta = np.zeros(p)
        beta[0] = 2.0
        if p > 2:
            beta[2] = -1.5
    x = rng.standard_normal((n, p))
    y = x @ beta + sigma * rng.standard_normal(n) + tau_shift
    return Dataset(x, y), np.asarray(beta)


def full_subset(p):
    return ModelSubset(tuple(range(1, p + 1)), p)
