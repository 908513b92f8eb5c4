import numpy as np
import pytest

from curved_two_body.potentials import gravitational
from curved_two_body.reduced_core import Geometry, Masses


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def equal_masses() -> Masses:
    return Masses.from_ratio(1.0)


@pytest.fixture
def half_masses() -> Masses:
    return Masses.from_ratio(0.5)


@pytest.fixture
def sphere_pot():
    return gravitational(Geometry.SPHERE)


@pytest.fixture
def l2_pot():
    return gravitational(Geometry.LOBACHEVSKY)


@pytest.fixture(params=[Geometry.SPHERE, Geometry.LOBACHEVSKY], ids=["s2", "l2"])
def geometry(request) -> Geometry:
    return request.param
