import pytest

from gibbsldp.maps import MapSpec
from gibbsldp.orbitsets import periodic_points
from gibbsldp.pressure import curve_from_orbit


@pytest.fixture(scope="session")
def quad():
    return MapSpec.quadratic(0.1)


@pytest.fixture(scope="session")
def quad_orbit12(quad):
    return periodic_points(quad, 12)


@pytest.fixture(scope="session")
def quad_curve12(quad_orbit12):
    return curve_from_orbit(quad_orbit12)


@pytest.fixture(scope="session")
def power2_orbit12():
    return periodic_points(MapSpec.power(2), 12)
