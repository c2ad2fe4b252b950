import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fockcis import RadialWeight, SpaceParams, build_reference

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def w2():
    return RadialWeight.alpha_model(2.0)


@pytest.fixture(scope="session")
def w15():
    return RadialWeight.alpha_model(1.5)


@pytest.fixture(scope="session")
def p2():
    return SpaceParams(2.0)


@pytest.fixture(scope="session")
def ref2(w2, p2):
    return build_reference(w2, p2, 400)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
