import numpy as np
import pytest

from vsl.field import GridSpec, RadialProfile, ScalarField, sample_profile


@pytest.fixture
def spec64():
    return GridSpec(64, 4.0)


@pytest.fixture
def spec128():
    return GridSpec(128, 4.0)


@pytest.fixture
def spec256():
    return GridSpec(256, 4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def gaussian256():
    return sample_profile(RadialProfile.gaussian(), GridSpec(256, 6.0))


def disk_field(spec: GridSpec, radius: float = 1.0, center=(0.0, 0.0)) -> ScalarField:
    X, Y = spec.meshgrid()
    return ScalarField(spec, (((X - center[0]) ** 2 + (Y - center[1]) ** 2) < radius**2).astype(float))
