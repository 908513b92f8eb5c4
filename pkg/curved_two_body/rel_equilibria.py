"""
Relative equilibria (RE) of the reduced system.

Every RE has m_x = 0 and p = 0. It is described by the separation q and the
arc α = θ₁ from the mass μ₁ to the rotation axis (θ₂ = q − α).

On L² there are two RE for every q: one with elliptic momentum (C = M² > 0)
and one with hyperbolic momentum (C = −M² < 0). Both share the angle α solving
sinh 2(q−α) = μ sinh 2α. On S² with unequal masses there is exactly one RE
for every q ≠ π/2: acute for q < π/2 and obtuse for q > π/2. With equal masses
there is the isosceles family (α = q/2) and the right-angled family (q = π/2).
"""
from dataclasses import dataclass
from enum import Enum
import logging
import math
from typing import Any

import numpy as np
from scipy import optimize

from curved_two_body.errors import NoSolution, UnequalMasses, ValidationError
from curved_two_body.potentials import GravitationalPotential, Potential
from curved_two_body.reduced_core import (
    Geometry,
    Masses,
    ReducedState,
    casimir,
    check_q,
    vector_field,
)

logger = logging.getLogger(__name__)

SPHERE_RIGHT_ANGLE_TOL = 1e-7
BISECTION_XTOL = 1e-14
SLOPE_STEP = 1e-6


class Family(str, Enum):
    ELLIPTIC_L2 = "elliptic_l2"
    HYPERBOLIC_L2 = "hyperbolic_l2"
    ACUTE = "acute"
    OBTUSE = "obtuse"
    ISOSCELES = "isosceles"
    RIGHT_ANGLED = "right_angled"

    @property
    def geometry(self) -> Geometry:
        if self in (Family.ELLIPTIC_L2, Family.HYPERBOLIC_L2):
            return Geometry.LOBACHEVSKY
        return Geometry.SPHERE


@dataclass(frozen=True)
class RelativeEquilibrium:
    geometry: Geometry
    family: Family
    q: float
    alpha: float
    m_sq: float
    M0: float
    omega: float
    zeta: float
    state: ReducedState
    masses: Masses
    potential: Potential

    @property
    def theta1(self) -> float:
        return self.alpha

    @property
    def theta2(self) -> float:
        return self.q - self.alpha

    @property
    def M2(self) -> float:
        return self.M0 ** 2

    @property
    def residual(self) -> float:
        return float(np.linalg.norm(
            vector_field(self.state, self.masses, self.geometry, self.potential)
        ))

    @property
    def is_normalized_gravitational(self) -> bool:
        return (
            isinstance(self.potential, GravitationalPotential)
            and self.potential.k == 1.0
            and self.masses.mu1 == 1.0
        )

    def as_record(self) -> dict[str, Any]:
        return {
            "geometry": self.geometry.value,
            "family": self.family.value,
            "q": self.q,
            "alpha": self.alpha,
            "M2": self.M2,
            "omega": self.omega,
            "C": self.m_sq,
            "residual": self.residual,
        }


def f_indicator(q: float, alpha: float, geometry: Geometry) -> float:
    """f = 1 − 4 s²(α) s²(q−α), s = sin on S² and sinh on L²."""
    return float(1.0 - 4.0 * geometry.sn(alpha) ** 2 * geometry.sn(q - alpha) ** 2)


def equal_mass_f(family: Family | str, alpha: float) -> float:
    """f along the equal-mass sphere families as a function of α alone."""
    family = Family(family)
    c2 = math.cos(alpha) ** 2
    if family == Family.ISOSCELES:
        return (3.0 - 2.0 * c2) * (2.0 * c2 - 1.0)
    elif family == Family.RIGHT_ANGLED:
        return (2.0 * c2 - 1.0) ** 2
    else:
        raise ValueError(f"Family {family.value} has no equal-mass closed form.")


def zeta(alpha: float, masses: Masses, geometry: Geometry) -> float:
    return 0.5 * masses.mu1 * float(geometry.sn(2.0 * alpha))


def angular_speed(re: RelativeEquilibrium, pot: Potential | None = None) -> float:
    pot = re.potential if pot is None else pot
    return math.sqrt(float(pot.eval_du(re.q)) / re.zeta)


def _make_re(
    geometry: Geometry,
    family: Family,
    q: float,
    alpha: float,
    m: np.ndarray,
    masses: Masses,
    pot: Potential,
) -> RelativeEquilibrium:
    state = ReducedState(m=m, q=q, p=0.0)
    z = zeta(alpha, masses, geometry)
    c = casimir(state.m, geometry)
    return RelativeEquilibrium(
        geometry=geometry,
        family=family,
        q=float(q),
        alpha=float(alpha),
        m_sq=c,
        M0=math.sqrt(abs(c)),
        omega=math.sqrt(float(pot.eval_du(q)) / z),
        zeta=z,
        state=state,
        masses=masses,
        potential=pot,
    )


def l2_alpha(q: float, mu: float) -> float:
    """α = q/2 + ¼ ln((μ+e^{2q})/(1+μe^{2q})), rewritten without overflow."""
    decay = math.exp(-2.0 * q)
    return 0.5 * q + 0.25 * (math.log1p(mu * decay) - math.log(mu) - math.log1p(decay / mu))


def elliptic_denominator(q: float, alpha: float, mu: float) -> float:
    return (
        mu * math.cosh(alpha) ** 2 * math.cosh(q)
        + math.cosh(alpha) * math.cosh(q - alpha)
    )


def hyperbolic_denominator(q: float, alpha: float, mu: float | None = None) -> float:
    """
    μ sinh²α cosh q − sinh α sinh(q−α). When ``mu`` is omitted the factored
    form, valid on the RE relation, is returned; it is positive for
    0 < α < q.
    """
    if mu is not None:
        return mu * math.sinh(alpha) ** 2 * math.cosh(q) - math.sinh(alpha) * math.sinh(q - alpha)
    beta = q - alpha
    return 0.5 * math.tanh(alpha) * math.sinh(beta) * (
        2.0 * math.sinh(beta) ** 2 * math.cosh(alpha) + math.sinh(alpha) * math.sinh(2.0 * beta)
    )


def solve_l2_elliptic(q: float, masses: Masses, pot: Potential) -> RelativeEquilibrium:
    geometry = Geometry.LOBACHEVSKY
    check_q(q, geometry)
    alpha = l2_alpha(q, masses.mu)
    m_sq = masses.mu1 * math.sinh(q) ** 3 * float(pot.eval_du(q)) / elliptic_denominator(q, alpha, masses.mu)
    M = math.sqrt(m_sq)
    m = np.array([0.0, M * math.sinh(alpha), M * math.cosh(alpha)])
    return _make_re(geometry, Family.ELLIPTIC_L2, q, alpha, m, masses, pot)


def solve_l2_hyperbolic(q: float, masses: Masses, pot: Potential) -> RelativeEquilibrium:
    geometry = Geometry.LOBACHEVSKY
    check_q(q, geometry)
    alpha = l2_alpha(q, masses.mu)
    m_sq = masses.mu1 * math.sinh(q) ** 3 * float(pot.eval_du(q)) / hyperbolic_denominator(q, alpha)
    M = math.sqrt(m_sq)
    m = np.array([0.0, M * math.cosh(alpha), M * math.sinh(alpha)])
    return _make_re(geometry, Family.HYPERBOLIC_L2, q, alpha, m, masses, pot)


def solve_l2_parabolic(q: float, masses: Masses, pot: Potential) -> RelativeEquilibrium:
    raise NoSolution(
        f"No relative equilibrium with parabolic momentum (C=0) exists on L² (q={q!r})."
    )


@dataclass
class ParabolicReport:
    mu: float
    min_plus: float
    min_minus: float
    n_points: int

    @property
    def min_residual(self) -> float:
        return min(self.min_plus, self.min_minus)

    @property
    def holds(self) -> bool:
        return self.min_residual >= self.mu > 0


def parabolic_l2_check(q_grid: np.ndarray, masses: Masses) -> ParabolicReport:
    """
    Evidence that cosh 2q ± sinh 2q + μ never vanishes, i.e. that no RE with
    parabolic momentum exists.
    """
    q_grid = np.asarray(q_grid, dtype=float)
    mu = masses.mu
    plus = np.abs(np.cosh(2 * q_grid) + np.sinh(2 * q_grid) + mu)
    minus = np.abs(np.cosh(2 * q_grid) - np.sinh(2 * q_grid) + mu)
    report = ParabolicReport(
        mu=mu,
        min_plus=float(plus.min()),
        min_minus=float(minus.min()),
        n_points=q_grid.size,
    )
    if not report.holds:
        logger.warning("Parabolic check failed for mu=%g: min %g", mu, report.min_residual)
    return report


def q_branches(alpha: float, mu: float) -> tuple[float, float]:
    if not 0.0 < alpha < 0.5 * math.pi:
        raise ValidationError(f"Angle alpha={alpha!r} outside (0, pi/2).")
    if not 0.0 < mu <= 1.0:
        raise ValidationError(f"Mass ratio mu={mu!r} outside (0, 1].")
    half = 0.5 * math.asin(min(1.0, mu * math.sin(2.0 * alpha)))
    q_minus = math.fmod(alpha + half, math.pi)
    q_plus = math.fmod(alpha + 0.5 * math.pi - half, math.pi)
    return q_minus, q_plus


def f_mu(q: float, alpha: float, mu: float) -> float:
    """F_μ(q, α) = cos α (μ cos q cos α + cos(q−α))."""
    return math.cos(alpha) * (mu * math.cos(q) * math.cos(alpha) + math.cos(q - alpha))


def g_branches(alpha: float, mu: float) -> tuple[float, float]:
    """g±(α) = F_μ(q±(α), α); both are positive exactly for α in (0, π/2)."""
    half = 0.5 * math.asin(max(-1.0, min(1.0, mu * math.sin(2.0 * alpha))))
    q_minus = alpha + half
    q_plus = alpha + 0.5 * math.pi - half
    return f_mu(q_minus, alpha, mu), f_mu(q_plus, alpha, mu)


def _sphere_alpha(q: float, mu: float) -> float:

    def condition(alpha: float) -> float:
        return math.sin(2.0 * (q - alpha)) - mu * math.sin(2.0 * alpha)

    def slope(alpha: float) -> float:
        return -2.0 * math.cos(2.0 * (q - alpha)) - 2.0 * mu * math.cos(2.0 * alpha)

    upper = min(q, 0.5 * math.pi)
    alpha = optimize.bisect(condition, 0.0, upper, xtol=BISECTION_XTOL)
    derivative = slope(alpha)
    if derivative != 0.0:
        polished = alpha - condition(alpha) / derivative
        if 0.0 < polished < upper and abs(condition(polished)) <= abs(condition(alpha)):
            alpha = polished
        else:
            logger.debug("Newton polish rejected at q=%g, mu=%g", q, mu)
    return alpha


def solve_sphere(
    q: float,
    masses: Masses,
    pot: Potential,
    right_angle_tol: float = SPHERE_RIGHT_ANGLE_TOL,
) -> RelativeEquilibrium:
    geometry = Geometry.SPHERE
    check_q(q, geometry)
    mu = masses.mu
    near_right_angle = abs(q - 0.5 * math.pi) <= right_angle_tol
    if masses.is_equal:
        if near_right_angle:
            logger.info(
                "q=pi/2 with equal masses is the pitchfork point of a one-parameter family; "
                "returning the isosceles representative"
            )
            q = 0.5 * math.pi
        alpha = 0.5 * q
        family = Family.ISOSCELES
    else:
        if near_right_angle:
            raise NoSolution(f"There is no RE for q=pi/2 with unequal masses (mu={mu!r}).")
        if mu > 1.0:
            alpha = q - _sphere_alpha(q, 1.0 / mu)
        else:
            alpha = _sphere_alpha(q, mu)
        family = Family.ACUTE if q < 0.5 * math.pi else Family.OBTUSE
    m_sq = masses.mu1 * math.sin(q) ** 3 * float(pot.eval_du(q)) / f_mu(q, alpha, mu)
    M = math.sqrt(m_sq)
    m = np.array([0.0, M * math.sin(alpha), M * math.cos(alpha)])
    return _make_re(geometry, family, q, alpha, m, masses, pot)


def solve_sphere_right_angled(theta: float, masses: Masses, pot: Potential) -> RelativeEquilibrium:
    if not masses.is_equal:
        raise UnequalMasses(f"Right-angled RE need equal masses, got mu={masses.mu!r}.")
    if not 0.0 < theta < 0.5 * math.pi:
        raise ValidationError(f"Angle theta={theta!r} outside (0, pi/2).")
    q = 0.5 * math.pi
    m_sq = masses.mu1 * float(pot.eval_du(q)) / (math.cos(theta) * math.sin(theta))
    M = math.sqrt(m_sq)
    m = np.array([0.0, M * math.sin(theta), M * math.cos(theta)])
    return _make_re(Geometry.SPHERE, Family.RIGHT_ANGLED, q, theta, m, masses, pot)


def enumerate_re(
    q: float,
    masses: Masses,
    pot: Potential,
    geometry: Geometry,
) -> list[RelativeEquilibrium]:
    if geometry == Geometry.LOBACHEVSKY:
        return [solve_l2_elliptic(q, masses, pot), solve_l2_hyperbolic(q, masses, pot)]
    return [solve_sphere(q, masses, pot)]


def solve_family(
    family: Family | str,
    parameter: float,
    masses: Masses,
    pot: Potential,
) -> RelativeEquilibrium:
    """
    Solves a family at its natural parameter: q for every family except
    the right-angled one, which is parametrised by θ.
    """
    family = Family(family)
    if family == Family.ELLIPTIC_L2:
        return solve_l2_elliptic(parameter, masses, pot)
    elif family == Family.HYPERBOLIC_L2:
        return solve_l2_hyperbolic(parameter, masses, pot)
    elif family == Family.RIGHT_ANGLED:
        return solve_sphere_right_angled(parameter, masses, pot)
    re = solve_sphere(parameter, masses, pot)
    if re.family != family:
        raise NoSolution(f"No {family.value} RE at q={parameter!r} (found {re.family.value}).")
    return re


def momentum_slope_indicator(re: RelativeEquilibrium) -> float:
    """
    Closed-form quantity with the sign of dM²/dα along the branch:
    f/(cos²(q−α) cos 2(q−α) cos²α) on S² and
    f/(cosh²α cosh²(q−α) cosh 2(q−α)) on the elliptic L² branch.
    """
    f = f_indicator(re.q, re.alpha, re.geometry)
    beta = re.q - re.alpha
    if re.geometry == Geometry.SPHERE:
        return f / (math.cos(beta) ** 2 * math.cos(2 * beta) * math.cos(re.alpha) ** 2)
    return f / (math.cosh(re.alpha) ** 2 * math.cosh(beta) ** 2 * math.cosh(2 * beta))


def momentum_slope(re: RelativeEquilibrium, step: float = SLOPE_STEP) -> float:
    """dM²/dα along the branch through ``re``, by central differences in q."""
    if re.family == Family.RIGHT_ANGLED:
        lower = solve_sphere_right_angled(re.alpha - step, re.masses, re.potential)
        upper = solve_sphere_right_angled(re.alpha + step, re.masses, re.potential)
    else:
        lower = solve_family(re.family, re.q - step, re.masses, re.potential)
        upper = solve_family(re.family, re.q + step, re.masses, re.potential)
    return (upper.M2 - lower.M2) / (upper.alpha - lower.alpha)
