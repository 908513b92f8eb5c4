import math

import numpy as np
import pytest

from curved_two_body import jets
from curved_two_body.errors import AttractivityViolation, ValidationError
from curved_two_body.potentials import (
    CustomPotential,
    GravitationalPotential,
    PotentialEnum,
    TabulatedPotential,
    custom,
    gravitational,
    potential,
    tabulated,
)
from curved_two_body.reduced_core import Geometry


def test_gravitational_values():
    s2 = gravitational(Geometry.SPHERE, k=2.0)
    l2 = gravitational(Geometry.LOBACHEVSKY)
    assert s2.eval_u(1.0) == pytest.approx(-2.0 / math.tan(1.0))
    assert s2.eval_du(1.0) == pytest.approx(2.0 / math.sin(1.0) ** 2)
    assert l2.eval_u(1.0) == pytest.approx(-1.0 / math.tanh(1.0))
    assert l2.eval_ddu(1.0) == pytest.approx(-2.0 * math.cosh(1.0) / math.sinh(1.0) ** 3)


def test_gravitational_attractive(geometry):
    pot = gravitational(geometry)
    pot.validate()
    assert pot.derivative_residual() < 1e-8


def test_gravitational_rejects_nonpositive_k():
    with pytest.raises(ValidationError):
        gravitational(Geometry.SPHERE, k=0.0)


def test_factory_dispatch():
    assert isinstance(potential(PotentialEnum.GRAVITATIONAL, geometry="s2"), GravitationalPotential)
    assert isinstance(potential("gravitational", geometry="l2", k=3.0), GravitationalPotential)
    with pytest.raises(ValueError, match="not known"):
        potential("yukawa")


@pytest.mark.parametrize("q0", [0.4, 1.3, 2.5])
def test_gravitational_taylor(q0):
    pot = gravitational(Geometry.SPHERE)
    coefficients = pot.taylor(q0)
    assert coefficients[0] == pytest.approx(pot.eval_u(q0))
    assert coefficients[1] == pytest.approx(pot.eval_du(q0))
    assert coefficients[2] == pytest.approx(0.5 * pot.eval_ddu(q0))
    h = 1e-3
    assert np.polyval(coefficients[::-1], h) == pytest.approx(pot.eval_u(q0 + h), abs=1e-13)


def test_evaluate_on_jets():
    pot = gravitational(Geometry.LOBACHEVSKY)
    (q,) = jets.variables([1.2], 4)
    jet = pot.evaluate(q)
    assert jet.value == pytest.approx(pot.eval_u(1.2))
    assert jet.gradient()[0] == pytest.approx(pot.eval_du(1.2))


def test_custom_potential_taylor():
    pot = custom(
        u=lambda q: -1.0 / q,
        du=lambda q: 1.0 / q ** 2,
        ddu=lambda q: -2.0 / q ** 3,
        domain=(0.0, math.inf),
    )
    assert isinstance(pot, CustomPotential)
    coefficients = pot.taylor(1.0)
    assert coefficients[3] == pytest.approx(1.0, rel=1e-5)
    assert coefficients[4] == pytest.approx(-1.0, rel=1e-5)


def test_custom_potential_must_attract():
    with pytest.raises(AttractivityViolation) as info:
        custom(
            u=lambda q: np.cos(q),
            du=lambda q: -np.sin(q),
            ddu=lambda q: -np.cos(q),
            domain=(0.0, math.pi),
        )
    assert 0.0 < info.value.q < math.pi


def test_tabulated_from_csv(tmp_path):
    reference = gravitational(Geometry.LOBACHEVSKY)
    q = np.linspace(0.2, 4.0, 400)
    path = tmp_path / "table.csv"
    with open(path, "w") as handle:
        handle.write("q,U,dU\n")
        for x in q:
            handle.write(f"{x!r},{reference.eval_u(x)!r},{reference.eval_du(x)!r}\n")
    pot = tabulated(path, geometry="l2")
    assert isinstance(pot, TabulatedPotential)
    assert pot.domain == pytest.approx((0.2, 4.0))
    assert pot.eval_u(1.0) == pytest.approx(reference.eval_u(1.0), rel=1e-6)
    assert pot.eval_du(1.0) == pytest.approx(reference.eval_du(1.0), rel=1e-4)
    assert pot.taylor(1.0)[1] == pytest.approx(reference.eval_du(1.0), rel=1e-4)


def test_tabulated_rejects_repulsive_table():
    q = np.linspace(0.5, 2.0, 10)
    with pytest.raises(AttractivityViolation):
        TabulatedPotential(q=q, u=-q, du=-np.ones_like(q))
