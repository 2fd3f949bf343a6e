import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from edgecut import gen_gbs_bad, gen_posterior_bad
from edgecut.harness import random_instance

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=30
)
settings.load_profile("suite")


@pytest.fixture
def gbs4():
    return gen_gbs_bad(4)


@pytest.fixture
def pbad2():
    return gen_posterior_bad(2)


def sample_instance(seed, n_max=6, m_max=5, n_outcomes=2, dyadic=True):
    """Random small instance driven by one integer seed."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    m_min = max(2, int(np.ceil(np.log2(n) / np.log2(n_outcomes))))
    m = int(rng.integers(m_min, m_max + 1))
    k = int(rng.integers(2, min(3, n) + 1))
    return random_instance(rng, n=n, m=m, n_outcomes=n_outcomes, n_classes=k, dyadic=dyadic)
