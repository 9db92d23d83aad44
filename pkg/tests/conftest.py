import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

S6 = 1.0 / math.sqrt(6.0)


def random_complex(rng, shape, radius=1.0):
    """Entries uniform in the complex disc of the given radius."""
    r = radius * np.sqrt(rng.uniform(size=shape))
    t = rng.uniform(0, 2 * np.pi, size=shape)
    return r * np.exp(1j * t)


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20260417)


@pytest.fixture(scope="session")
def j32_matrix():
    v = 8.5
    return S6 * np.array(
        [[math.sqrt(3) * v, 0], [-math.sqrt(2) * v, v], [v, -math.sqrt(2) * v], [0, math.sqrt(3) * v]],
        dtype=complex,
    )
