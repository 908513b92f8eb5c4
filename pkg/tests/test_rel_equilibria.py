import math

import numpy as np
import pytest

from curved_two_body.errors import NoSolution, UnequalMasses, ValidationError
from curved_two_body.potentials import gravitational
from curved_two_body.reduced_core import Geometry, Masses
from curved_two_body.rel_equilibria import (
    Family,
    angular_speed,
    enumerate_re,
    equal_mass_f,
    f_indicator,
    g_branches,
    hyperbolic_denominator,
    l2_alpha,
    momentum_slope,
    momentum_slope_indicator,
    parabolic_l2_check,
    q_branches,
    solve_family,
    solve_l2_elliptic,
    solve_l2_hyperbolic,
    solve_l2_parabolic,
    solve_sphere,
    solve_sphere_right_angled,
)

S2 = gravitational(Geometry.SPHERE)
L2 = gravitational(Geometry.LOBACHEVSKY)


@pytest.mark.parametrize("mu", [0.1, 0.5, 1.0, 3.0])
@pytest.mark.parametrize("q", [0.2, 0.5, 1.0, 2.5, 5.0])
def test_l2_residuals(mu, q):
    masses = Masses.from_ratio(mu)
    elliptic = solve_l2_elliptic(q, masses, L2)
    hyperbolic = solve_l2_hyperbolic(q, masses, L2)
    assert elliptic.m_sq > 0
    assert hyperbolic.m_sq < 0
    assert elliptic.alpha == pytest.approx(hyperbolic.alpha)
    for re in (elliptic, hyperbolic):
        assert re.residual < 1e-12 * max(1.0, re.M2)
        assert re.state.m[0] == 0.0
        assert re.state.p == 0.0


@pytest.mark.parametrize("q", [0.3, 1.0, 4.0])
def test_l2_alpha_equal_masses(q):
    assert l2_alpha(q, 1.0) == pytest.approx(0.5 * q, abs=1e-15)


def test_l2_alpha_identity():
    q, mu = 1.0, 0.5
    alpha = l2_alpha(q, mu)
    assert math.sinh(2 * (q - alpha)) == pytest.approx(mu * math.sinh(2 * alpha), abs=1e-13)


def test_l2_alpha_large_separation():
    alpha = l2_alpha(400.0, 0.5)
    assert math.isfinite(alpha)
    assert alpha == pytest.approx(200.0 - 0.25 * math.log(0.5), abs=1e-9)


def test_hyperbolic_denominator_positive():
    for mu in np.linspace(0.1, 0.9, 9):
        for q in np.linspace(0.01, 5.0, 200):
            alpha = l2_alpha(q, mu)
            assert hyperbolic_denominator(q, alpha) > 0
            assert hyperbolic_denominator(q, alpha, mu) == pytest.approx(
                hyperbolic_denominator(q, alpha), rel=1e-6, abs=1e-12,
            )


def test_hyperbolic_blow_up_near_collision(equal_masses):
    m2 = [solve_l2_hyperbolic(q, equal_masses, L2).M2 for q in (0.1, 0.01, 0.001)]
    assert m2[0] < m2[1] < m2[2]
    assert m2[2] > 1e5


def test_parabolic_nonexistence():
    for mu in (0.1, 0.5, 1.0, 2.0):
        report = parabolic_l2_check(np.linspace(1e-3, 10.0, 10_000), Masses.from_ratio(mu))
        assert report.holds
        assert report.min_residual >= mu
    with pytest.raises(NoSolution):
        solve_l2_parabolic(1.0, Masses.from_ratio(0.5), L2)


def test_q_branches():
    q_minus, q_plus = q_branches(math.pi / 4, 0.7)
    assert q_minus == pytest.approx(math.pi / 4 + 0.5 * math.asin(0.7))
    assert q_plus == pytest.approx(3 * math.pi / 4 - 0.5 * math.asin(0.7))
    assert q_branches(0.3, 1e-12) == pytest.approx((0.3, 0.3 + 0.5 * math.pi))
    with pytest.raises(ValidationError):
        q_branches(2.0, 0.5)


def test_g_branches_positive():
    for alpha in np.linspace(0.01, 0.5 * math.pi - 0.01, 50):
        assert min(g_branches(alpha, 0.6)) > 0


def test_sphere_equal_masses_oracle(equal_masses):
    re = solve_sphere(math.pi / 3, equal_masses, S2)
    assert re.family == Family.ISOSCELES
    assert re.alpha == pytest.approx(math.pi / 6)
    assert re.M2 == pytest.approx(4 * math.sqrt(3) / 9)
    assert re.omega ** 2 == pytest.approx(16 / (3 * math.sqrt(3)))
    assert angular_speed(re) ** 2 == pytest.approx(3.0792, abs=1e-4)


def test_sphere_heavier_mass_closer_to_axis():
    re = solve_sphere(math.pi / 3, Masses.from_ratio(0.7), S2)
    assert re.family == Family.ACUTE
    assert re.theta2 < re.theta1
    assert re.residual < 1e-12


@pytest.mark.parametrize("mu", [0.2, 0.5, 0.9, 2.0])
@pytest.mark.parametrize("q", [0.1, 0.8, 1.4, 1.7, 2.5, 3.0])
def test_sphere_residuals(mu, q):
    re = solve_sphere(q, Masses.from_ratio(mu), S2)
    assert re.family == (Family.ACUTE if q < 0.5 * math.pi else Family.OBTUSE)
    assert 0.0 < re.alpha < q
    assert re.residual < 1e-12 * max(1.0, re.M2)


def test_sphere_mass_swap_mirrors_alpha():
    q = 1.1
    light = solve_sphere(q, Masses.from_ratio(0.4), S2)
    heavy = solve_sphere(q, Masses.from_ratio(2.5), S2)
    assert heavy.alpha == pytest.approx(q - light.alpha, abs=1e-12)


def test_sphere_no_solution_at_right_angle(half_masses):
    with pytest.raises(NoSolution):
        solve_sphere(1.5707963, half_masses, S2)


def test_pitchfork_point(equal_masses):
    isosceles = solve_sphere(0.5 * math.pi, equal_masses, S2)
    right = solve_sphere_right_angled(math.pi / 4, equal_masses, S2)
    assert isosceles.M2 == pytest.approx(2.0)
    assert right.M2 == pytest.approx(2.0)
    assert np.allclose(isosceles.state.m, right.state.m)


def test_right_angled(equal_masses):
    re = solve_sphere_right_angled(math.pi / 6, equal_masses, S2)
    assert re.M2 == pytest.approx(4 / math.sqrt(3))
    assert re.residual < 1e-12
    with pytest.raises(UnequalMasses):
        solve_sphere_right_angled(math.pi / 6, Masses.from_ratio(0.9), S2)
    with pytest.raises(ValidationError):
        solve_sphere_right_angled(2.0, equal_masses, S2)


def test_l2_angular_speed(equal_masses):
    re = solve_l2_elliptic(1.0, equal_masses, L2)
    assert re.omega ** 2 == pytest.approx(L2.eval_du(1.0) / (0.5 * math.sinh(1.0)))


def test_enumerate(half_masses, equal_masses):
    assert [re.family for re in enumerate_re(1.0, half_masses, L2, Geometry.LOBACHEVSKY)] == [
        Family.ELLIPTIC_L2, Family.HYPERBOLIC_L2,
    ]
    assert [re.family for re in enumerate_re(2.0, half_masses, S2, Geometry.SPHERE)] == [Family.OBTUSE]
    assert [re.family for re in enumerate_re(2.0, equal_masses, S2, Geometry.SPHERE)] == [Family.ISOSCELES]


def test_solve_family_checks_family(half_masses):
    with pytest.raises(NoSolution):
        solve_family(Family.OBTUSE, 1.0, half_masses, S2)
    assert solve_family("acute", 1.0, half_masses, S2).family == Family.ACUTE


def test_record_keys(half_masses):
    record = solve_l2_elliptic(1.0, half_masses, L2).as_record()
    assert list(record) == ["geometry", "family", "q", "alpha", "M2", "omega", "C", "residual"]


def test_f_indicator_pitchfork():
    assert f_indicator(0.5 * math.pi, math.pi / 4, Geometry.SPHERE) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.2, 0.6, 1.0])
def test_equal_mass_closed_forms(alpha):
    assert equal_mass_f(Family.ISOSCELES, alpha) == pytest.approx(
        f_indicator(2 * alpha, alpha, Geometry.SPHERE)
    )
    assert equal_mass_f(Family.RIGHT_ANGLED, alpha) == pytest.approx(
        f_indicator(0.5 * math.pi, alpha, Geometry.SPHERE)
    )
    with pytest.raises(ValueError):
        equal_mass_f(Family.ACUTE, alpha)


@pytest.mark.parametrize("family, q", [
    (Family.ACUTE, 0.6),
    (Family.OBTUSE, 1.7),
    (Family.OBTUSE, 2.8),
    (Family.ELLIPTIC_L2, 0.8),
    (Family.ELLIPTIC_L2, 2.0),
])
def test_momentum_slope_sign(half_masses, family, q):
    pot = S2 if family.geometry == Geometry.SPHERE else L2
    re = solve_family(family, q, half_masses, pot)
    slope = momentum_slope(re)
    assert np.sign(slope) == np.sign(momentum_slope_indicator(re))
