import dataclasses
import math

import numpy as np
import pytest
from scipy.linalg import expm

from curved_two_body.errors import (
    NonEllipticEquilibrium,
    ResonantLinearPart,
    SmallDenominator,
    ValidationError,
)
from curved_two_body.normal_form import (
    ARNOLD_TOL,
    RESONANCE_TOL,
    STANDARD_J,
    KamVerdict,
    NormalForm4,
    Poly4,
    arnold_determinant,
    birkhoff4,
    birkhoff4_real,
    canonical_hessian,
    check_small_denominators,
    fig10_curves,
    kam_analysis,
    kam_verdict,
    linear_normalize,
    taylor4,
)
from curved_two_body.jets import monomials
from curved_two_body.potentials import gravitational
from curved_two_body.reduced_core import Geometry, Masses
from curved_two_body.rel_equilibria import Family, q_branches, solve_l2_elliptic, solve_sphere
from curved_two_body.stability import char_coeffs, eigen_frequencies, hessian_at_re

S2 = gravitational(Geometry.SPHERE)


def _oscillator(alpha1: float, alpha2: float, extra: dict | None = None) -> Poly4:
    terms = {
        (2, 0, 0, 0): 0.5 * alpha1,
        (0, 2, 0, 0): 0.5 * alpha1,
        (0, 0, 2, 0): 0.5 * alpha2,
        (0, 0, 0, 2): 0.5 * alpha2,
    }
    for exps, c in (extra or {}).items():
        terms[exps] = terms.get(exps, 0.0) + c
    return Poly4.from_terms(terms)


def _random_perturbation(rng, degrees=(3, 4)) -> dict:
    return {mono: 0.3 * rng.normal() for mono in monomials(4, 4) if sum(mono) in degrees}


def _block_rotation(theta1: float, theta2: float) -> np.ndarray:
    out = np.zeros((4, 4))
    for k, theta in ((0, theta1), (2, theta2)):
        c, s = math.cos(theta), math.sin(theta)
        out[k:k + 2, k:k + 2] = [[c, -s], [s, c]]
    return out


def _acute_re(mu: float = 0.3, q: float = 0.5):
    return solve_sphere(q, Masses.from_ratio(mu), S2)


def test_poly4_rejects_linear_terms():
    with pytest.raises(ValidationError):
        Poly4.from_terms({(1, 0, 0, 0): 1.0, (2, 0, 0, 0): 1.0})
    with pytest.raises(ValidationError):
        Poly4.from_terms({(0, 0, 0, 0): 1.0})


def test_quartic_expansion():
    h = Poly4.from_terms({(2, 0, 0, 0): 1.0, (0, 2, 0, 0): 1.0}).jet
    square = Poly4(h * h)
    assert square.quartic[(4, 0, 0, 0)] == pytest.approx(1.0)
    assert square.cubic == {}


def test_identity_normalisation():
    transform, alpha1, alpha2 = linear_normalize(_oscillator(1.0, -2.0))
    assert np.allclose(transform, np.eye(4), atol=1e-12)
    assert (alpha1, alpha2) == pytest.approx((1.0, -2.0))


def test_scrambled_normalisation(rng):
    generator = rng.normal(size=(4, 4))
    scramble = expm(STANDARD_J @ (0.15 * (generator + generator.T)))
    assert np.allclose(scramble.T @ STANDARD_J @ scramble, STANDARD_J, atol=1e-12)
    h = _oscillator(1.0, -2.0).compose_linear(scramble)
    transform, alpha1, alpha2 = linear_normalize(h)
    assert (alpha1, alpha2) == pytest.approx((1.0, -2.0), abs=1e-10)
    assert np.allclose(transform.T @ STANDARD_J @ transform, STANDARD_J, atol=1e-10)
    normal = h.compose_linear(transform).hessian()
    assert np.allclose(normal, np.diag([1.0, 1.0, -2.0, -2.0]), atol=1e-9)


def test_one_to_one_resonance():
    with pytest.raises(ResonantLinearPart):
        linear_normalize(_oscillator(1.0, 1.0))


def test_hyperbolic_linear_part():
    with pytest.raises(NonEllipticEquilibrium):
        linear_normalize(Poly4.from_terms({(1, 1, 0, 0): 1.0, (0, 0, 2, 0): 0.5, (0, 0, 0, 2): 0.5}))


def test_small_denominators():
    check_small_denominators(1.0, math.sqrt(5.0))
    with pytest.raises(SmallDenominator) as info:
        check_small_denominators(1.0, 2.0)
    assert abs(info.value.k1 * 1.0 + info.value.k2 * 2.0) < 1e-12
    with pytest.raises(SmallDenominator):
        check_small_denominators(1.0, -3.0)


def test_normal_form_already_normal():
    h = _oscillator(1.0, 3.0, {(4, 0, 0, 0): 1.0, (2, 2, 0, 0): 2.0, (0, 4, 0, 0): 1.0})
    for route in (birkhoff4, birkhoff4_real):
        nf = route(h)
        assert (nf.alpha1, nf.alpha2) == pytest.approx((1.0, 3.0))
        assert nf.beta11 == pytest.approx(4.0)
        assert nf.beta12 == pytest.approx(0.0, abs=1e-12)
        assert nf.beta22 == pytest.approx(0.0, abs=1e-12)


def test_mixed_coefficient_convention():
    # I₁I₂ with Iⱼ = xⱼ² + yⱼ²
    mixed = {(2, 0, 2, 0): 1.0, (2, 0, 0, 2): 1.0, (0, 2, 2, 0): 1.0, (0, 2, 0, 2): 1.0}
    for route in (birkhoff4, birkhoff4_real):
        nf = route(_oscillator(1.0, -2.0, mixed))
        assert nf.beta12 == pytest.approx(2.0)
        assert nf.beta11 == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(50))
def test_routes_agree_on_generic_oscillator(seed):
    rng = np.random.default_rng(seed)
    h = _oscillator(1.0, -math.sqrt(5.0), _random_perturbation(rng))
    complex_route = birkhoff4(h)
    real_route = birkhoff4_real(h)
    for name in ("beta11", "beta12", "beta22"):
        assert getattr(complex_route, name) == pytest.approx(getattr(real_route, name), abs=1e-8)


def test_beta_invariant_under_rotations(rng):
    h = _oscillator(0.7, 1.9, _random_perturbation(rng))
    reference = birkhoff4(h)
    rotated = birkhoff4(h.compose_linear(_block_rotation(0.4, -1.3)))
    for name in ("beta11", "beta12", "beta22"):
        assert getattr(rotated, name) == pytest.approx(getattr(reference, name), abs=1e-8)


def test_cubic_contribution():
    # x₁³ at α₁ = 1 shifts the first frequency by −(15/4)I₁
    nf = birkhoff4(_oscillator(1.0, math.sqrt(3.0), {(3, 0, 0, 0): 1.0}))
    assert nf.beta11 == pytest.approx(-15.0 / 4.0, rel=1e-10)
    assert nf.beta12 == pytest.approx(0.0, abs=1e-12)
    assert birkhoff4_real(_oscillator(1.0, math.sqrt(3.0), {(3, 0, 0, 0): 1.0})).beta11 == pytest.approx(-15.0 / 4.0, rel=1e-10)


@pytest.mark.parametrize("alpha, beta, expected", [
    ((1.0, 1.0), (0.0, 1.0, 0.0), 2.0),
    ((1.0, -1.0), (0.0, 0.0, 0.0), 0.0),
    ((0.5, 2.0), (1.0, 0.0, 0.0), -4.0),
])
def test_arnold_determinant(alpha, beta, expected):
    nf = NormalForm4(alpha1=alpha[0], alpha2=alpha[1], beta11=beta[0], beta12=beta[1], beta22=beta[2])
    assert arnold_determinant(nf) == pytest.approx(expected)
    assert nf.arnold_d == pytest.approx(expected)


def test_taylor4_quadratic_part():
    re = _acute_re()
    h = taylor4(re)
    assert np.allclose(h.hessian(), canonical_hessian(re, hessian_at_re(re)), atol=1e-12 * re.M2)


@pytest.mark.parametrize("mu, q", [(0.3, 0.5), (0.6, 1.0), (0.9, 0.3)])
def test_frequencies_match_characteristic_polynomial(mu, q):
    re = _acute_re(mu, q)
    _, alpha1, alpha2 = linear_normalize(taylor4(re))
    omega1, omega2 = eigen_frequencies(*char_coeffs(re))
    assert abs(alpha1) == pytest.approx(omega1, rel=1e-9)
    assert abs(alpha2) == pytest.approx(omega2, rel=1e-9)


def test_acute_normal_form_routes_agree():
    h = taylor4(_acute_re())
    complex_route = birkhoff4(h)
    real_route = birkhoff4_real(h)
    scale = max(abs(complex_route.beta11), abs(complex_route.beta12), abs(complex_route.beta22))
    for name in ("beta11", "beta12", "beta22"):
        assert getattr(complex_route, name) == pytest.approx(getattr(real_route, name), abs=1e-8 * scale)


def test_kam_acute():
    result = kam_analysis(_acute_re())
    assert result.verdict == KamVerdict.NONLINEARLY_STABLE
    assert result.normal_form.arnold_d != 0.0
    record = result.as_record()
    assert record["kam"] == "nonlinearly_stable"
    assert set(record["normal_form"]) >= {"alpha1", "alpha2", "beta11", "beta12", "beta22", "D"}


@pytest.mark.parametrize("mu", [0.15, 0.35, 0.55, 0.75, 0.9])
@pytest.mark.parametrize("alpha", [0.2, 0.4, 0.6, 0.8])
def test_kam_verdict_over_acute_family(mu, alpha):
    re = solve_sphere(q_branches(alpha, mu)[0], Masses.from_ratio(mu), S2)
    assert re.family == Family.ACUTE
    result = kam_analysis(re)
    nf, report = result.normal_form, result.report
    d = 2.0 * nf.beta12 * nf.alpha1 * nf.alpha2 - nf.beta11 * nf.alpha2 ** 2 - nf.beta22 * nf.alpha1 ** 2
    assert np.sign(nf.arnold_d) == np.sign(d)
    off_resonance = min(abs(report.R2), abs(report.R3)) > RESONANCE_TOL * report.char_a ** 2
    twisted = abs(nf.arnold_d) > ARNOLD_TOL * (abs(nf.alpha1) + abs(nf.alpha2)) ** 3
    expected = KamVerdict.NONLINEARLY_STABLE if off_resonance and twisted else KamVerdict.INCONCLUSIVE
    assert result.verdict == expected


def test_kam_rejects_unstable_re(equal_masses):
    re = solve_l2_elliptic(2.0, equal_masses, gravitational(Geometry.LOBACHEVSKY))
    with pytest.raises(NonEllipticEquilibrium):
        kam_analysis(re)


def test_kam_inconclusive_cases():
    result = kam_analysis(_acute_re())
    on_resonance = dataclasses.replace(result.report, R2=0.0)
    assert kam_verdict(on_resonance, result.normal_form) == KamVerdict.INCONCLUSIVE
    flat = dataclasses.replace(result.normal_form, beta11=0.0, beta12=0.0, beta22=0.0)
    assert kam_verdict(result.report, flat) == KamVerdict.INCONCLUSIVE


def test_pitchfork_linear_part(equal_masses):
    re = solve_sphere(0.5 * math.pi, equal_masses, S2)
    with pytest.raises((ResonantLinearPart, NonEllipticEquilibrium)):
        linear_normalize(taylor4(re))


def test_fig10_curves():
    mu_grid = np.linspace(0.6, 0.99, 10)
    alpha_grid = np.linspace(0.05, 0.5 * math.pi - 0.05, 12)
    result = fig10_curves(mu_grid, alpha_grid)
    assert result.r2.shape == (10, 12)
    assert result.contours["R2"]
    assert result.contours["R3"]
    for segment in result.contours["R2"]:
        assert segment.shape[1] == 2
        assert np.all((segment[:, 0] >= 0.6) & (segment[:, 0] <= 0.99))


def _min_distance(curves_a: list[np.ndarray], curves_b: list[np.ndarray]) -> float:
    a = np.concatenate(curves_a)
    b = np.concatenate(curves_b)
    return float(np.min(np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)))


def test_fig10_curves_are_disjoint():
    result = fig10_curves(np.linspace(0.05, 1.0, 30), np.linspace(0.02, 1.5, 40))
    assert len(result.contours["R2"]) >= 1
    assert len(result.contours["R3"]) >= 1
    assert len(result.contours["D"]) >= 2
    assert _min_distance(result.contours["D"], result.contours["R2"]) > 0.01
    assert _min_distance(result.contours["D"], result.contours["R3"]) > 0.01
    assert _min_distance(result.contours["R2"], result.contours["R3"]) > 0.01
