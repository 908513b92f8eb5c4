"""
Leaf-wise stability of relative equilibria.

The reduced Hamiltonian is restricted to the symplectic leaf of the RE through
an Andoyer-type chart (α, q, z, p). Its Hessian at the RE is block diagonal in
the order (α, q | z, p). The linearization λ⁴ + aλ² + b, the indicator f and
the resonance polynomials R₁, R₂, R₃ follow from it.
"""
import cmath
from dataclasses import dataclass
from enum import Enum
import logging
import math
from typing import Any, Sequence

import numpy as np
from scipy import optimize

from curved_two_body import jets
from curved_two_body.charts import ChartEnum, LeafChart, chart
from curved_two_body.errors import NoSolution, NonEllipticEquilibrium, ValidationError
from curved_two_body.potentials import Potential, gravitational
from curved_two_body.reduced_core import (
    Geometry,
    Masses,
    hamiltonian_components,
    vector_field_array,
)
from curved_two_body.rel_equilibria import (
    Family,
    RelativeEquilibrium,
    f_indicator,
    q_branches,
    solve_family,
    solve_sphere,
)

logger = logging.getLogger(__name__)

SIGNATURE_TOL = 1e-9
DEGENERATE_TOL = 1e-10
BLOCK_TOL = 1e-10
CRITICAL_XTOL = 1e-15
HESSIAN_STEP = 1e-4
JACOBIAN_STEP = 1e-6


class Verdict(str, Enum):
    ELLIPTIC = "elliptic"
    LINEARLY_UNSTABLE = "linearly_unstable"
    DEFINITE_STABLE = "definite_stable"
    DEGENERATE = "degenerate"


class HessianMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    JET = "jet"
    FINITE_DIFFERENCE = "finite_difference"


@dataclass
class StabilityReport:
    family: Family
    q: float
    alpha: float
    hessian: np.ndarray
    signature: tuple[int, int, int]
    char_a: float
    char_b: float
    f_indicator: float
    R1: float
    R2: float
    R3: float
    eigenvalues: np.ndarray
    verdict: Verdict

    def as_record(self) -> dict[str, Any]:
        return {
            "family": self.family.value,
            "q": self.q,
            "alpha": self.alpha,
            "signature": list(self.signature),
            "a": self.char_a,
            "b": self.char_b,
            "f": self.f_indicator,
            "R1": self.R1,
            "R2": self.R2,
            "R3": self.R3,
            "eigenvalues": [complex(x) for x in self.eigenvalues],
            "hessian": self.hessian,
            "verdict": self.verdict.value,
        }


def chart_for(re: RelativeEquilibrium) -> LeafChart:
    if re.family == Family.ELLIPTIC_L2:
        return chart(ChartEnum.L2_ELLIPTIC, c=re.m_sq)
    elif re.family == Family.HYPERBOLIC_L2:
        return chart(ChartEnum.L2_HYPERBOLIC, c=re.m_sq)
    return chart(ChartEnum.SPHERE_ANDOYER, c=re.m_sq)


def leaf_point(re: RelativeEquilibrium) -> np.ndarray:
    return np.array([re.alpha, re.q, 0.0, 0.0])


def restricted_hamiltonian(
    chart: LeafChart,
    leaf_state: Sequence[float],
    masses: Masses,
    pot: Potential,
) -> float:
    alpha, q, z, p = (float(x) for x in leaf_state)
    chart.check(alpha, z)
    mx, my, mz = chart.momentum(alpha, z)
    return float(hamiltonian_components(mx, my, mz, q, p, masses, chart.geometry, pot))


def restricted_jet(
    chart: LeafChart,
    center: Sequence[float],
    masses: Masses,
    pot: Potential,
    degree: int,
    canonical: bool = False,
) -> jets.Jet:
    """
    Taylor expansion of the restricted Hamiltonian at ``center``.

    With ``canonical=False`` the variables are the displacements of
    (α, q, z, p). With ``canonical=True`` they are (x₁, y₁, x₂, y₂) =
    (δα, s·δz, δq, δp), s = chart.bracket_sign, which are canonical.
    """
    alpha0, q0, z0, p0 = (float(x) for x in center)
    chart.check(alpha0, z0)
    if canonical:
        x1, y1, x2, y2 = jets.variables([0.0, 0.0, 0.0, 0.0], degree)
        alpha, q, z, p = alpha0 + x1, q0 + x2, z0 + chart.bracket_sign * y1, p0 + y2
    else:
        alpha, q, z, p = jets.variables([alpha0, q0, z0, p0], degree)
    mx, my, mz = chart.momentum(alpha, z)
    return hamiltonian_components(mx, my, mz, q, p, masses, chart.geometry, pot)


def canonical_permutation(bracket_sign: int) -> np.ndarray:
    """P with (δα, δq, δz, δp) = P (x₁, y₁, x₂, y₂)."""
    return np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, float(bracket_sign), 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])


def closed_form_hessian(re: RelativeEquilibrium) -> np.ndarray:
    """
    Hessian blocks in closed form. Valid for the normalised gravitational
    problem (μ₁ = 1, Gμ₁μ₂ = 1).
    """
    if not re.is_normalized_gravitational:
        raise ValidationError("Closed-form Hessian needs mu1=1 and the gravitational potential with k=1.")
    q, a, mu, M2 = re.q, re.alpha, re.masses.mu, re.M2
    if re.geometry == Geometry.SPHERE:
        s = math.sin(q)
        n1 = np.array([
            [-M2 * (math.cos(2 * (q - a)) + mu * math.cos(2 * a)) / s ** 2,
             M2 * (-s * math.cos(2 * a) + (1 + mu) * math.cos(q) * math.sin(2 * a)) / s ** 3],
            [0.0, M2 * (1 + mu) * math.cos(a) ** 2 / s ** 4],
        ])
        n2 = np.array([
            [-math.cos(a) * (math.cos(2 * q - a) + mu * math.cos(a)) / s ** 2, 1.0],
            [1.0, 1.0 + mu],
        ])
    else:
        s = math.sinh(q)
        n1_11 = M2 * (math.cosh(2 * (q - a)) + mu * math.cosh(2 * a)) / s ** 2
        n1_12 = -M2 * (-s * math.cosh(2 * a) + (1 + mu) * math.cosh(q) * math.sinh(2 * a)) / s ** 3
        if re.family == Family.HYPERBOLIC_L2:
            n1_22 = M2 * (1 + mu) * math.sinh(a) ** 2 / s ** 4
            n2_11 = (-math.cosh(2 * (q - a)) + math.cosh(2 * q) - 2 * mu * math.sinh(a) ** 2) / (math.cosh(2 * q) - 1)
        else:
            n1_22 = M2 * (1 + mu) * math.cosh(a) ** 2 / s ** 4
            n2_11 = math.cosh(a) * (math.cosh(2 * q - a) + mu * math.cosh(a)) / s ** 2
        n1 = np.array([[n1_11, n1_12], [0.0, n1_22]])
        n2 = np.array([[n2_11, -1.0], [-1.0, 1.0 + mu]])
    n1[1, 0] = n1[0, 1]
    hessian = np.zeros((4, 4))
    hessian[:2, :2] = n1
    hessian[2:, 2:] = n2
    return hessian


def _finite_difference_hessian(chart: LeafChart, center: np.ndarray, masses: Masses, pot: Potential, h: float) -> np.ndarray:

    def value(point):
        return restricted_hamiltonian(chart, point, masses, pot)

    hessian = np.zeros((4, 4))
    eye = np.eye(4) * h
    for ii in range(4):
        for jj in range(ii, 4):
            hessian[ii, jj] = (
                value(center + eye[ii] + eye[jj]) - value(center + eye[ii] - eye[jj])
                - value(center - eye[ii] + eye[jj]) + value(center - eye[ii] - eye[jj])
            ) / (4 * h * h)
            hessian[jj, ii] = hessian[ii, jj]
    return hessian


def hessian_at_re(re: RelativeEquilibrium, method: HessianMethod | str = HessianMethod.JET) -> np.ndarray:
    """Leaf Hessian at the RE in the order (α, q | z, p)."""
    method = HessianMethod(method)
    if method == HessianMethod.CLOSED_FORM:
        return closed_form_hessian(re)
    leaf_chart = chart_for(re)
    if method == HessianMethod.JET:
        jet = restricted_jet(leaf_chart, leaf_point(re), re.masses, re.potential, degree=2)
        return jet.hessian()
    elif method == HessianMethod.FINITE_DIFFERENCE:
        return _finite_difference_hessian(leaf_chart, leaf_point(re), re.masses, re.potential, HESSIAN_STEP)
    else:
        raise ValueError(f"Hessian method {method} not known.")


def signature(matrix: np.ndarray, tol: float = SIGNATURE_TOL) -> tuple[int, int, int]:
    eigenvalues = np.linalg.eigvalsh(0.5 * (matrix + matrix.T))
    scale = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    zero = np.abs(eigenvalues) <= tol * scale
    n_plus = int(np.sum((eigenvalues > 0) & ~zero))
    n_minus = int(np.sum((eigenvalues < 0) & ~zero))
    return n_plus, n_minus, int(np.sum(zero))


def structure_matrix(bracket_sign: int) -> np.ndarray:
    """J in the order (α, q, z, p) with {α, z} = bracket_sign and {q, p} = 1."""
    s = float(bracket_sign)
    return np.array([
        [0.0, 0.0, s, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-s, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ])


def linearization_matrix(re: RelativeEquilibrium, hessian: np.ndarray | None = None) -> np.ndarray:
    if hessian is None:
        hessian = hessian_at_re(re)
    return structure_matrix(chart_for(re).bracket_sign) @ hessian


def linearization_coefficients(linearization: np.ndarray) -> tuple[float, float]:
    """(a, b) of λ⁴ + aλ² + b for a Hamiltonian 4×4 linearization."""
    a = -0.5 * float(np.trace(linearization @ linearization))
    b = float(np.linalg.det(linearization))
    return a, b


def char_coeffs(re: RelativeEquilibrium) -> tuple[float, float]:
    if re.geometry == Geometry.SPHERE and re.is_normalized_gravitational:
        q, alpha = re.q, re.alpha
        a = re.M2 * (1.0 + math.cos(2 * (q - alpha))) / (math.sin(q) ** 2 * math.sin(alpha) ** 2)
        b = a * a * f_indicator(q, alpha, re.geometry) / 4.0
        return a, b
    return linearization_coefficients(linearization_matrix(re))


def resonance_indicators(a: float, b: float) -> tuple[float, float, float]:
    return a * a / 4.0 - b, 4.0 * a * a / 25.0 - b, 9.0 * a * a / 100.0 - b


def eigen_frequencies(a: float, b: float) -> tuple[float, float]:
    """Ω₁ ≤ Ω₂ with Ω² = (a ∓ √(a² − 4b))/2."""
    disc = a * a - 4.0 * b
    if not (a > 0 and b > 0 and disc >= 0):
        raise NonEllipticEquilibrium(f"No elliptic frequencies for a={a!r}, b={b!r}.")
    root = math.sqrt(disc)
    big = 0.5 * (a + root)
    small = b / big
    return math.sqrt(small), math.sqrt(big)


def quartic_roots(a: float, b: float) -> np.ndarray:
    """Roots of λ⁴ + aλ² + b through the resolvent in λ²."""
    root = cmath.sqrt(complex(a * a - 4.0 * b))
    if abs(a + root) < abs(a - root):
        root = -root
    first = -0.5 * (a + root)
    second = b / first if first != 0 else -a - first
    out = []
    for value in (second, first):
        lam = cmath.sqrt(value)
        out.extend([lam, -lam])
    return np.array(out, dtype=complex)


def _is_block_diagonal(hessian: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(hessian))))
    return float(np.max(np.abs(hessian[:2, 2:]))) <= BLOCK_TOL * scale


def classify(re: RelativeEquilibrium, method: HessianMethod | str = HessianMethod.JET) -> StabilityReport:
    hessian = hessian_at_re(re, method=method)
    linearization = linearization_matrix(re, hessian)
    a, b = char_coeffs(re)
    if _is_block_diagonal(hessian):
        eigenvalues = quartic_roots(a, b)
    else:
        logger.debug("Hessian is not block diagonal at q=%g; using a dense eigen solver", re.q)
        eigenvalues = np.linalg.eigvals(linearization)
    if re.family == Family.HYPERBOLIC_L2:
        f = math.nan
    else:
        f = f_indicator(re.q, re.alpha, re.geometry)
    r1, r2, r3 = resonance_indicators(a, b)
    sig = signature(hessian)

    if sig[2] > 0 or (math.isfinite(f) and abs(f) < DEGENERATE_TOL):
        verdict = Verdict.DEGENERATE
    elif sig[0] == 4 or sig[1] == 4:
        verdict = Verdict.DEFINITE_STABLE
    elif sig[1] % 2 == 1:
        verdict = Verdict.LINEARLY_UNSTABLE
    elif a > 0 and b > 0 and r1 > 0:
        verdict = Verdict.ELLIPTIC
    else:
        verdict = Verdict.LINEARLY_UNSTABLE
    return StabilityReport(
        family=re.family,
        q=re.q,
        alpha=re.alpha,
        hessian=hessian,
        signature=sig,
        char_a=a,
        char_b=b,
        f_indicator=f,
        R1=r1,
        R2=r2,
        R3=r3,
        eigenvalues=eigenvalues,
        verdict=verdict,
    )


def reduced_jacobian(re: RelativeEquilibrium, h: float = JACOBIAN_STEP) -> np.ndarray:
    """5×5 Jacobian of the reduced vector field at the RE; its nonzero spectrum is the leaf spectrum."""
    y0 = re.state.as_array()
    jacobian = np.zeros((5, 5))
    for ii in range(5):
        step = np.zeros(5)
        step[ii] = h
        jacobian[:, ii] = (
            vector_field_array(y0 + step, re.masses, re.geometry, re.potential)
            - vector_field_array(y0 - step, re.masses, re.geometry, re.potential)
        ) / (2 * h)
    return jacobian


def _l2_critical(mu: float) -> tuple[float, float]:

    def condition(u: float) -> float:
        return 2.0 * u * (1.0 - math.sqrt(1.0 + 4.0 * mu * mu * u * (1.0 + u))) + 1.0

    def slope(u: float) -> float:
        root = math.sqrt(1.0 + 4.0 * mu * mu * u * (1.0 + u))
        return 2.0 * (1.0 - root) - 4.0 * mu * mu * u * (1.0 + 2.0 * u) / root

    upper = 1.0
    while condition(upper) > 0:
        upper *= 2.0
    u = optimize.bisect(condition, 0.0, upper, xtol=CRITICAL_XTOL * upper)
    polished = u - condition(u) / slope(u)
    if 0.0 < polished < upper and abs(condition(polished)) <= abs(condition(u)):
        u = polished
    alpha = math.asinh(math.sqrt(u))
    return alpha, alpha + 0.5 * math.asinh(mu * math.sinh(2.0 * alpha))


def _sphere_critical(mu: float) -> tuple[float, float]:

    def condition(alpha: float) -> float:
        w = max(0.0, 1.0 - (mu * math.sin(2.0 * alpha)) ** 2)
        return math.cos(2.0 * alpha) - 2.0 * math.sin(alpha) ** 2 * math.sqrt(w)

    def slope(alpha: float) -> float:
        s2 = math.sin(2.0 * alpha)
        root = math.sqrt(max(0.0, 1.0 - (mu * s2) ** 2))
        if root == 0.0:
            return math.nan
        return (
            -2.0 * s2 * (1.0 + root)
            + 4.0 * mu * mu * math.sin(alpha) ** 2 * s2 * math.cos(2.0 * alpha) / root
        )

    alpha = optimize.bisect(condition, 0.0, 0.5 * math.pi, xtol=CRITICAL_XTOL)
    derivative = slope(alpha)
    if math.isfinite(derivative) and derivative != 0.0:
        polished = alpha - condition(alpha) / derivative
        if 0.0 < polished < 0.5 * math.pi and abs(condition(polished)) <= abs(condition(alpha)):
            alpha = polished
    return alpha, q_branches(alpha, mu)[1]


def critical_angle(mu: float, geometry: Geometry | str) -> tuple[float, float]:
    """
    (α*, q*) separating stable and unstable RE: elliptic L² RE are
    Lyapunov stable for q < q*, obtuse S² RE are elliptic for q < q*.
    """
    geometry = Geometry(geometry)
    if not mu > 0:
        raise ValidationError(f"Mass ratio must be positive, got {mu}.")
    if geometry == Geometry.LOBACHEVSKY:
        return _l2_critical(mu)
    if mu > 1.0:
        alpha, q_star = _sphere_critical(1.0 / mu)
        return q_star - alpha, q_star
    return _sphere_critical(mu)


def momentum_along_branch(
    mu: float,
    geometry: Geometry | str,
    family: Family | str,
    q_grid: Sequence[float],
    pot: Potential | None = None,
) -> list[tuple[float, float]]:
    geometry = Geometry(geometry)
    family = Family(family)
    if family.geometry != geometry:
        raise ValidationError(f"Family {family.value} does not live on {geometry.value}.")
    masses = Masses.from_ratio(mu)
    pot = gravitational(geometry, 1.0) if pot is None else pot
    samples = []
    for q in q_grid:
        try:
            re = solve_family(family, float(q), masses, pot)
        except NoSolution:
            continue
        samples.append((re.q, re.M2))
    return samples


@dataclass
class AbPath:
    mu: float
    family: Family
    alpha: np.ndarray
    q: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @property
    def r1(self) -> np.ndarray:
        return self.a ** 2 / 4.0 - self.b

    @property
    def r2(self) -> np.ndarray:
        return 4.0 * self.a ** 2 / 25.0 - self.b

    @property
    def r3(self) -> np.ndarray:
        return 9.0 * self.a ** 2 / 100.0 - self.b


def ab_path(mu: float, family: Family | str, alpha_grid: Sequence[float]) -> AbPath:
    """
    The curve α ↦ (a, b) along the acute (q = q₋(α)) or obtuse
    (q = q₊(α)) sphere branch for the normalised gravitational problem.
    """
    family = Family(family)
    if family not in (Family.ACUTE, Family.OBTUSE):
        raise ValidationError(f"(a, b) paths are defined for acute and obtuse RE, not {family.value}.")
    masses = Masses.from_ratio(mu)
    pot = gravitational(Geometry.SPHERE, 1.0)
    rows = []
    for alpha in alpha_grid:
        q = q_branches(float(alpha), mu)[0 if family == Family.ACUTE else 1]
        try:
            re = solve_sphere(q, masses, pot)
        except NoSolution:
            continue
        rows.append((re.alpha, re.q, *char_coeffs(re)))
    table = np.array(rows).reshape(-1, 4)
    return AbPath(mu=mu, family=family, alpha=table[:, 0], q=table[:, 1], a=table[:, 2], b=table[:, 3])
