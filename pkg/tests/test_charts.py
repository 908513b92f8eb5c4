import numpy as np
import pytest

from curved_two_body import jets
from curved_two_body.charts import (
    ChartEnum,
    L2EllipticChart,
    L2HyperbolicChart,
    SphereAndoyerChart,
    chart,
)
from curved_two_body.errors import ChartDomainError
from curved_two_body.reduced_core import casimir

CHARTS = [
    (ChartEnum.SPHERE_ANDOYER, 2.0, 1),
    (ChartEnum.L2_ELLIPTIC, 3.0, -1),
    (ChartEnum.L2_HYPERBOLIC, -3.0, -1),
]


@pytest.mark.parametrize("kind, c, sign", CHARTS)
def test_round_trip(kind, c, sign):
    leaf = chart(kind, c)
    for point in ([0.3, 1.1, 0.2, -0.4], [-0.7, 0.8, -0.5, 0.1], [1.2, 2.0, 0.9, 0.0]):
        s = leaf.to_state(point)
        assert leaf.on_leaf(s)
        assert casimir(s.m, leaf.geometry) == pytest.approx(c)
        assert np.allclose(leaf.from_state(s), point, atol=1e-13)


@pytest.mark.parametrize("kind, c, sign", CHARTS)
def test_bracket_sign(kind, c, sign):
    leaf = chart(kind, c)
    assert leaf.bracket_sign == sign
    assert leaf.poisson_check([0.4, 1.0, 0.3, 0.0]) == pytest.approx(sign, abs=1e-8)


@pytest.mark.parametrize("kind, c, sign", CHARTS)
def test_momentum_accepts_jets(kind, c, sign):
    leaf = chart(kind, c)
    alpha, z = jets.variables([0.4, 0.3], 3)
    m = leaf.momentum(alpha, z)
    assert np.allclose([x.value for x in m], leaf.momentum(0.4, 0.3))


def test_factory():
    assert isinstance(chart("sphere_andoyer", 1.0), SphereAndoyerChart)
    assert isinstance(chart(ChartEnum.L2_ELLIPTIC, 1.0), L2EllipticChart)
    assert isinstance(chart(ChartEnum.L2_HYPERBOLIC, -1.0), L2HyperbolicChart)
    with pytest.raises(ValueError, match="not known"):
        chart("stereographic", 1.0)


def test_leaf_sign_checked():
    with pytest.raises(ChartDomainError):
        SphereAndoyerChart(c=-1.0)
    with pytest.raises(ChartDomainError):
        L2EllipticChart(c=0.0)
    with pytest.raises(ChartDomainError):
        L2HyperbolicChart(c=1.0)


def test_domain_errors():
    with pytest.raises(ChartDomainError):
        SphereAndoyerChart(c=1.0).to_state([0.0, 1.0, 1.5, 0.0])
    with pytest.raises(ChartDomainError):
        L2HyperbolicChart(c=-1.0).to_state([0.0, 1.0, 1.0, 0.0])
    with pytest.raises(ChartDomainError):
        L2EllipticChart(c=1.0).angle(np.array([0.0, 2.0, 1.0]))
    assert L2EllipticChart(c=1.0).M == pytest.approx(1.0)
