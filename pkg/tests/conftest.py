import numpy as np
import pytest

from anisolab.spectrum import ProblemParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_params(rng, p=None, max_N=7, frac_hi=0.95):
    """Valid (N, p, gamma) with gamma a random fraction of the Hardy constant."""
    N = int(rng.integers(2, max_N + 1))
    if p is None:
        p = float(rng.uniform(1.05, N - 0.05))
    base = ProblemParams(N, p, 0.0)
    return base.with_gamma(float(rng.uniform(0, frac_hi)) * base.C_H)
