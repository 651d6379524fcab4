import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "cplab",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("cplab")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
