import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def spd(rng, n):
    a = rng.normal(size=(n, n))
    return a.T @ a + np.eye(n)
