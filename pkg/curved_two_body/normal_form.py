"""
Birkhoff normal form to degree four at elliptic relative equilibria, the
Arnold determinant and the resulting nonlinear (KAM) stability verdict.

Polynomials live in the canonical leaf coordinates (x₁, y₁, x₂, y₂) with
{xⱼ, yⱼ} = 1. After the linear normalisation H₂ = ½ Σ αⱼ (xⱼ² + yⱼ²) and the
degree-four normal form reads

    K = ½(α₁I₁ + α₂I₂) + ¼(β₁₁I₁² + 2β₁₂I₁I₂ + β₂₂I₂²),  Iⱼ = xⱼ² + yⱼ².

Two independent routes compute it: a complex route (zⱼ = xⱼ + i yⱼ, diagonal
homological operator) and a real route (dense homological solve, angle
averaging).
"""
from dataclasses import dataclass, field
from enum import Enum
import itertools
import logging
import math
from multiprocessing import Pool
from typing import Any, Sequence

import numpy as np

from curved_two_body import jets
from curved_two_body.errors import (
    NoSolution,
    NonEllipticEquilibrium,
    NumericalError,
    ResonantLinearPart,
    SmallDenominator,
    ValidationError,
)
from curved_two_body.plotting import zero_level_polylines
from curved_two_body.potentials import gravitational
from curved_two_body.reduced_core import Geometry, Masses
from curved_two_body.rel_equilibria import Family, RelativeEquilibrium, q_branches, solve_sphere
from curved_two_body.stability import (
    StabilityReport,
    Verdict,
    canonical_permutation,
    chart_for,
    char_coeffs,
    classify,
    leaf_point,
    resonance_indicators,
    restricted_jet,
)

logger = logging.getLogger(__name__)

NVARS = 4
DEGREE = 4
LINEAR_PART_TOL = 1e-8
ELLIPTIC_TOL = 1e-8
SYMPLECTIC_TOL = 1e-10
SMALL_DENOMINATOR_TOL = 1e-8
RESONANCE_TOL = 1e-6
ARNOLD_TOL = 1e-8

# Pairs (x, y) of canonical variables.
PAIRS = ((0, 1), (2, 3))
STANDARD_J = np.array([
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
])


class KamVerdict(str, Enum):
    NONLINEARLY_STABLE = "nonlinearly_stable"
    INCONCLUSIVE = "inconclusive"


@dataclass
class Poly4:
    """Polynomial of degree ≤ 4 in (x₁, y₁, x₂, y₂) with no constant or linear part."""
    jet: jets.Jet

    def __post_init__(self):
        if (self.jet.nvars, self.jet.degree) != (NVARS, DEGREE):
            raise ValidationError(
                f"Expected a jet in {NVARS} variables of degree {DEGREE}, "
                f"got ({self.jet.nvars}, {self.jet.degree})."
            )
        scale = max(1.0, float(np.max(np.abs(self.jet.coefficients))))
        if abs(self.jet.value) > LINEAR_PART_TOL * scale or np.max(np.abs(self.jet.gradient())) > LINEAR_PART_TOL * scale:
            raise ValidationError("Poly4 must vanish to second order at the origin.")

    @classmethod
    def from_terms(cls, terms: dict[tuple[int, ...], float]) -> "Poly4":
        return cls(jets.Jet.from_terms(terms, NVARS, DEGREE))

    def part(self, total_degree: int) -> dict[tuple[int, ...], float]:
        return self.jet.terms(total_degree)

    @property
    def quadratic(self) -> dict[tuple[int, ...], float]:
        return self.part(2)

    @property
    def cubic(self) -> dict[tuple[int, ...], float]:
        return self.part(3)

    @property
    def quartic(self) -> dict[tuple[int, ...], float]:
        return self.part(4)

    def hessian(self) -> np.ndarray:
        return self.jet.hessian()

    def compose_linear(self, matrix: np.ndarray) -> "Poly4":
        return Poly4(self.jet.compose_linear(matrix))

    def evaluate(self, point: Sequence[float]) -> float:
        return self.jet.evaluate(point)


def taylor4(re: RelativeEquilibrium) -> Poly4:
    """Degree-four expansion of the leaf Hamiltonian at the RE in canonical coordinates."""
    leaf_chart = chart_for(re)
    jet = restricted_jet(leaf_chart, leaf_point(re), re.masses, re.potential, degree=DEGREE, canonical=True)
    linear = float(np.max(np.abs(jet.gradient())))
    if linear > LINEAR_PART_TOL:
        logger.warning("Linear part %.3e at the RE (q=%g) is dropped", linear, re.q)
    coefficients = jet.coefficients.copy()
    coefficients[:NVARS + 1] = 0.0
    return Poly4(jets.Jet(coefficients, NVARS, DEGREE))


def canonical_hessian(re: RelativeEquilibrium, hessian: np.ndarray) -> np.ndarray:
    """Leaf Hessian in the order (α, q, z, p) rewritten in (x₁, y₁, x₂, y₂)."""
    perm = canonical_permutation(chart_for(re).bracket_sign)
    return perm.T @ hessian @ perm


def linear_normalize(quadratic: Poly4 | np.ndarray) -> tuple[np.ndarray, float, float]:
    """
    Symplectic S with H₂(S·) = ½ Σ αⱼ (xⱼ² + yⱼ²), |α₁| ≤ |α₂|. The sign of αⱼ
    is the Krein signature of the mode.
    """
    hessian = quadratic.hessian() if isinstance(quadratic, Poly4) else np.asarray(quadratic, dtype=float)
    linearization = STANDARD_J @ hessian
    eigenvalues, eigenvectors = np.linalg.eig(linearization)
    scale = float(np.max(np.abs(eigenvalues)))
    if scale == 0.0:
        raise ResonantLinearPart("Quadratic part vanishes identically.")
    if np.max(np.abs(eigenvalues.real)) > ELLIPTIC_TOL * scale:
        raise NonEllipticEquilibrium(f"Linear part is not elliptic: eigenvalues {eigenvalues}.")
    upper = [ii for ii in range(4) if eigenvalues[ii].imag > ELLIPTIC_TOL * scale]
    if len(upper) != 2:
        raise ResonantLinearPart(f"Zero or repeated eigenvalues in {eigenvalues}.")
    upper.sort(key=lambda ii: eigenvalues[ii].imag)
    frequencies = [eigenvalues[ii].imag for ii in upper]
    if frequencies[1] - frequencies[0] <= ELLIPTIC_TOL * scale:
        raise ResonantLinearPart(f"1:1 resonance in the linear part: {frequencies}.")

    columns = []
    alphas = []
    for ii, omega in zip(upper, frequencies):
        v = eigenvectors[:, ii]
        k = int(np.flatnonzero(np.abs(v) >= (1.0 - 1e-8) * np.max(np.abs(v)))[0])
        v = v * np.conj(v[k]) / abs(v[k])
        u, w = v.real, v.imag
        c = float(u @ STANDARD_J @ w)
        if c == 0.0:
            raise NumericalError("Degenerate eigenvector in the linear normalisation.")
        factor = 1.0 / math.sqrt(abs(c))
        if c > 0:
            columns.extend([u * factor, w * factor])
            alphas.append(omega)
        else:
            columns.extend([u * factor, -w * factor])
            alphas.append(-omega)
    transform = np.column_stack(columns)
    defect = float(np.max(np.abs(transform.T @ STANDARD_J @ transform - STANDARD_J)))
    if defect > SYMPLECTIC_TOL * max(1.0, float(np.max(np.abs(transform))) ** 2):
        logger.warning("Linear normalisation is symplectic only to %.3e", defect)
    if abs(alphas[0]) > abs(alphas[1]):
        transform = transform[:, [2, 3, 0, 1]]
        alphas = alphas[::-1]
    return transform, float(alphas[0]), float(alphas[1])


def check_small_denominators(alpha1: float, alpha2: float, order: int = DEGREE) -> None:
    threshold = SMALL_DENOMINATOR_TOL * (abs(alpha1) + abs(alpha2))
    for k1 in range(-order, order + 1):
        for k2 in range(-order, order + 1):
            if (k1, k2) == (0, 0) or abs(k1) + abs(k2) > order:
                continue
            value = k1 * alpha1 + k2 * alpha2
            if abs(value) < threshold:
                raise SmallDenominator(k1=k1, k2=k2, value=value)


# Sparse polynomials {exponents: coefficient} for the Lie-series algebra.
PolyDict = dict[tuple[int, ...], complex]


def _add(a: PolyDict, b: PolyDict, factor: complex = 1.0) -> PolyDict:
    out = dict(a)
    for exps, c in b.items():
        out[exps] = out.get(exps, 0.0) + factor * c
    return out


def _mul(a: PolyDict, b: PolyDict, max_degree: int = DEGREE) -> PolyDict:
    out: PolyDict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            exps = tuple(x + y for x, y in zip(ea, eb))
            if sum(exps) <= max_degree:
                out[exps] = out.get(exps, 0.0) + ca * cb
    return out


def _derivative(a: PolyDict, var: int) -> PolyDict:
    out: PolyDict = {}
    for exps, c in a.items():
        if exps[var]:
            lowered = list(exps)
            lowered[var] -= 1
            out[tuple(lowered)] = out.get(tuple(lowered), 0.0) + exps[var] * c
    return out


def _bracket(a: PolyDict, b: PolyDict, factor: complex = 1.0) -> PolyDict:
    """factor · Σⱼ (∂a/∂uⱼ ∂b/∂vⱼ − ∂a/∂vⱼ ∂b/∂uⱼ) over the pairs (uⱼ, vⱼ)."""
    out: PolyDict = {}
    for u, v in PAIRS:
        out = _add(out, _mul(_derivative(a, u), _derivative(b, v)), factor)
        out = _add(out, _mul(_derivative(a, v), _derivative(b, u)), -factor)
    return out


def _substitute(a: PolyDict, images: Sequence[PolyDict]) -> PolyDict:
    out: PolyDict = {}
    for exps, c in a.items():
        term: PolyDict = {(0,) * NVARS: c}
        for var, power in enumerate(exps):
            for _ in range(power):
                term = _mul(term, images[var])
        out = _add(out, term)
    return out


def _unit(var: int) -> tuple[int, ...]:
    return tuple(1 if ii == var else 0 for ii in range(NVARS))


@dataclass
class NormalForm4:
    alpha1: float
    alpha2: float
    beta11: float
    beta12: float
    beta22: float
    margins: dict[str, float] = field(default_factory=dict)

    @property
    def omega1(self) -> float:
        return abs(self.alpha1)

    @property
    def omega2(self) -> float:
        return abs(self.alpha2)

    @property
    def arnold_d(self) -> float:
        return arnold_determinant(self)

    @property
    def resonance_flags(self) -> dict[str, bool]:
        return {name: abs(value) <= RESONANCE_TOL for name, value in self.margins.items()}

    def as_record(self) -> dict[str, Any]:
        return {
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "beta11": self.beta11,
            "beta12": self.beta12,
            "beta22": self.beta22,
            "D": self.arnold_d,
            "margins": self.margins,
            "resonances": self.resonance_flags,
        }


def arnold_determinant(nf: NormalForm4) -> float:
    return (
        2.0 * nf.beta12 * nf.alpha1 * nf.alpha2
        - nf.beta11 * nf.alpha2 ** 2
        - nf.beta22 * nf.alpha1 ** 2
    )


def _margins(alpha1: float, alpha2: float) -> dict[str, float]:
    a = alpha1 ** 2 + alpha2 ** 2
    b = alpha1 ** 2 * alpha2 ** 2
    r1, r2, r3 = resonance_indicators(a, b)
    return {"1:1": r1 / a ** 2, "2:1": r2 / a ** 2, "3:1": r3 / a ** 2}


def _normalized(h: Poly4) -> tuple[PolyDict, PolyDict, PolyDict, float, float]:
    """Linearly normalised cubic and quartic parts plus α₁, α₂."""
    transform, alpha1, alpha2 = linear_normalize(h)
    g = h.compose_linear(transform)
    # Without a cubic part no homological equation is solved.
    if g.cubic:
        check_small_denominators(alpha1, alpha2)
    return g.quadratic, g.cubic, g.quartic, alpha1, alpha2


def birkhoff4(h: Poly4) -> NormalForm4:
    """Complex route: zⱼ = xⱼ + i yⱼ, wⱼ = z̄ⱼ, {zⱼ, wⱼ} = −2i."""
    _, h3, h4, alpha1, alpha2 = _normalized(h)
    alphas = (alpha1, alpha2)
    # x = (z + w)/2, y = (z − w)/(2i) in the variable order (z₁, w₁, z₂, w₂).
    images: list[PolyDict] = []
    for z, w in PAIRS:
        images.append({_unit(z): 0.5, _unit(w): 0.5})
        images.append({_unit(z): -0.5j, _unit(w): 0.5j})
    c3 = _substitute(h3, images)
    c4 = _substitute(h4, images)

    chi: PolyDict = {}
    for exps, c in c3.items():
        denominator = sum((exps[z] - exps[w]) * alpha for (z, w), alpha in zip(PAIRS, alphas))
        chi[exps] = 1j * c / denominator
    k4 = _add(c4, _bracket(c3, chi, -2j), 0.5)

    # zⱼwⱼ = Iⱼ
    beta11 = 4.0 * k4.get((2, 2, 0, 0), 0.0)
    beta12 = 2.0 * k4.get((1, 1, 1, 1), 0.0)
    beta22 = 4.0 * k4.get((0, 0, 2, 2), 0.0)
    imaginary = max(abs(complex(x).imag) for x in (beta11, beta12, beta22))
    if imaginary > 1e-8 * max(1.0, *(abs(x) for x in (beta11, beta12, beta22))):
        logger.warning("Normal form coefficients carry an imaginary part %.3e", imaginary)
    return NormalForm4(
        alpha1=alpha1,
        alpha2=alpha2,
        beta11=float(complex(beta11).real),
        beta12=float(complex(beta12).real),
        beta22=float(complex(beta22).real),
        margins=_margins(alpha1, alpha2),
    )


def _angle_average(a: int, b: int) -> float:
    """Mean of cosᵃθ sinᵇθ over a period."""
    if a % 2 or b % 2:
        return 0.0
    return float(_double_factorial(a - 1) * _double_factorial(b - 1) / _double_factorial(a + b))


def _double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def birkhoff4_real(h: Poly4) -> NormalForm4:
    """Real route: dense solve of {χ, H₂} = H₃ and averaging over both angles."""
    _, h3, h4, alpha1, alpha2 = _normalized(h)
    h2: PolyDict = {}
    for (x, y), alpha in zip(PAIRS, (alpha1, alpha2)):
        h2[tuple(2 * e for e in _unit(x))] = 0.5 * alpha
        h2[tuple(2 * e for e in _unit(y))] = 0.5 * alpha

    basis = [mono for mono in jets.monomials(NVARS, 3) if sum(mono) == 3]
    position = {mono: ii for ii, mono in enumerate(basis)}
    operator = np.zeros((len(basis), len(basis)))
    for col, mono in enumerate(basis):
        for exps, c in _bracket({mono: 1.0}, h2).items():
            operator[position[exps], col] += float(np.real(c))
    rhs = np.array([float(np.real(h3.get(mono, 0.0))) for mono in basis])
    solution = np.linalg.solve(operator, rhs)
    chi: PolyDict = {mono: value for mono, value in zip(basis, solution)}
    k4 = _add(h4, _bracket(h3, chi), 0.5)

    # Averaged coefficients of I₁², I₁I₂, I₂².
    averaged = {(2, 0): 0.0, (1, 1): 0.0, (0, 2): 0.0}
    for exps, c in k4.items():
        if sum(exps) != 4:
            continue
        weight = _angle_average(exps[0], exps[1]) * _angle_average(exps[2], exps[3])
        if weight == 0.0:
            continue
        # x^a y^b = I^{(a+b)/2} cos^a θ sin^b θ
        powers = ((exps[0] + exps[1]) // 2, (exps[2] + exps[3]) // 2)
        averaged[powers] += float(np.real(c)) * weight
    return NormalForm4(
        alpha1=alpha1,
        alpha2=alpha2,
        beta11=4.0 * averaged[(2, 0)],
        beta12=2.0 * averaged[(1, 1)],
        beta22=4.0 * averaged[(0, 2)],
        margins=_margins(alpha1, alpha2),
    )


def kam_verdict(report: StabilityReport, nf: NormalForm4) -> KamVerdict:
    if report.verdict != Verdict.ELLIPTIC:
        raise NonEllipticEquilibrium(f"KAM analysis needs an elliptic RE, got {report.verdict.value}.")
    a = report.char_a
    if abs(report.R2) <= RESONANCE_TOL * a * a or abs(report.R3) <= RESONANCE_TOL * a * a:
        return KamVerdict.INCONCLUSIVE
    if abs(nf.arnold_d) <= ARNOLD_TOL * (abs(nf.alpha1) + abs(nf.alpha2)) ** 3:
        return KamVerdict.INCONCLUSIVE
    return KamVerdict.NONLINEARLY_STABLE


@dataclass
class KamResult:
    report: StabilityReport
    normal_form: NormalForm4
    verdict: KamVerdict

    def as_record(self) -> dict[str, Any]:
        return {
            **self.report.as_record(),
            "normal_form": self.normal_form.as_record(),
            "kam": self.verdict.value,
        }


def kam_analysis(re: RelativeEquilibrium) -> KamResult:
    report = classify(re)
    if report.verdict != Verdict.ELLIPTIC:
        raise NonEllipticEquilibrium(f"KAM analysis needs an elliptic RE, got {report.verdict.value}.")
    nf = birkhoff4(taylor4(re))
    return KamResult(report=report, normal_form=nf, verdict=kam_verdict(report, nf))


@dataclass
class Fig10Result:
    mu: np.ndarray
    alpha: np.ndarray
    r2: np.ndarray
    r3: np.ndarray
    arnold: np.ndarray
    contours: dict[str, list[np.ndarray]]


def _fig10_point(args: tuple[float, float]) -> tuple[float, float, float]:
    mu, alpha = args
    try:
        masses = Masses.from_ratio(mu)
        re = solve_sphere(q_branches(alpha, mu)[0], masses, gravitational(Geometry.SPHERE, 1.0))
        if re.family != Family.ACUTE:
            return math.nan, math.nan, math.nan
        a, b = char_coeffs(re)
        _, r2, r3 = resonance_indicators(a, b)
        nf = birkhoff4(taylor4(re))
        scale = (abs(nf.alpha1) + abs(nf.alpha2)) ** 3
        return r2 / a ** 2, r3 / a ** 2, nf.arnold_d / scale
    except (NoSolution, ValidationError, NumericalError) as e:
        logger.debug("fig10 point (mu=%g, alpha=%g) skipped: %s", mu, alpha, e)
        return math.nan, math.nan, math.nan


def _near_sign_change(values: np.ndarray) -> np.ndarray:
    """True at grid points whose sign differs from a horizontal or vertical neighbour."""
    sign = np.sign(values)
    near = np.zeros(values.shape, dtype=bool)
    flip_x = sign[1:, :] * sign[:-1, :] < 0
    flip_y = sign[:, 1:] * sign[:, :-1] < 0
    near[1:, :] |= flip_x
    near[:-1, :] |= flip_x
    near[:, 1:] |= flip_y
    near[:, :-1] |= flip_y
    return near


def fig10_curves(
    mu_grid: Sequence[float],
    alpha_grid: Sequence[float],
    jobs: int = 1,
) -> Fig10Result:
    """
    Zero sets of R₂, R₃ and the Arnold determinant over the (μ, α) plane for
    acute sphere RE of the normalised gravitational problem.
    """
    mu_grid = np.asarray(mu_grid, dtype=float)
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    points = list(itertools.product(mu_grid, alpha_grid))
    if jobs > 1:
        with Pool(processes=jobs) as pool:
            values = pool.map(_fig10_point, points)
    else:
        values = [_fig10_point(point) for point in points]
    table = np.array(values).reshape(mu_grid.size, alpha_grid.size, 3)
    # D has a pole on the 2:1 resonance; its sign flip there is not a zero.
    arnold = np.where(
        _near_sign_change(table[:, :, 0]) | _near_sign_change(table[:, :, 1]),
        np.nan,
        table[:, :, 2],
    )
    contours = {
        "R2": zero_level_polylines(mu_grid, alpha_grid, table[:, :, 0]),
        "R3": zero_level_polylines(mu_grid, alpha_grid, table[:, :, 1]),
        "D": zero_level_polylines(mu_grid, alpha_grid, arnold),
    }
    logger.info(
        "fig10: %d points, %d/%d/%d zero-level components",
        len(points), *(len(contours[name]) for name in ("R2", "R3", "D")),
    )
    return Fig10Result(
        mu=mu_grid,
        alpha=alpha_grid,
        r2=table[:, :, 0],
        r3=table[:, :, 1],
        arnold=table[:, :, 2],
        contours=contours,
    )
