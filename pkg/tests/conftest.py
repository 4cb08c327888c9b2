import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=int(os.environ.get("HYPOTHESIS_MAX_EXAMPLES", "40")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_state(d, rng, rank=None):
    g = rng.standard_normal((d, d if rank is None else rank)) + 1j * rng.standard_normal((d, d if rank is None else rank))
    r = g @ g.conj().T
    return r / np.trace(r).real


def random_probs(k, rng):
    p = rng.random(k) + 0.05
    return p / p.sum()
