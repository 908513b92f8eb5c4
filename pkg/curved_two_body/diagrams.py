"""
Energy-momentum bifurcation data of the RE families, the stability region
q*(μ) and the admissible (C, H) cloud.
"""
from dataclasses import dataclass, field
import logging
import math
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from scipy import optimize

from curved_two_body.errors import NoSolution, ValidationError
from curved_two_body.potentials import Potential, gravitational
from curved_two_body.reduced_core import (
    Geometry,
    Masses,
    ReducedState,
    casimir,
    hamiltonian,
    random_states,
)
from curved_two_body.rel_equilibria import Family, f_indicator, solve_family
from curved_two_body.serializer import write_csv
from curved_two_body.stability import classify, critical_angle

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100
DEFAULT_SAMPLES = 400
SINGULAR_TOL = 1e-8
BRANCH_MARGIN = 0.02
L2_Q_MAX = 4.0
BRANCH_HEADER = ("family", "param", "q", "alpha", "C", "H", "n_plus", "n_minus", "n_zero", "verdict")


@dataclass
class BranchCurve:
    family: Family
    parameter: np.ndarray
    q: np.ndarray
    alpha: np.ndarray
    C: np.ndarray
    H: np.ndarray
    signatures: list[tuple[int, int, int]]
    verdicts: list[str]
    singular: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.parameter)

    def rows(self) -> list[list[Any]]:
        return [
            [self.family.value, param, q, alpha, c, h, *sig, verdict]
            for param, q, alpha, c, h, sig, verdict in zip(
                self.parameter, self.q, self.alpha, self.C, self.H, self.signatures, self.verdicts,
            )
        ]

    def points(self) -> np.ndarray:
        return np.column_stack([self.C, self.H])

    def singular_points(self, masses: Masses, pot: Potential) -> np.ndarray:
        """(C, H) of the marked singular RE."""
        out = []
        for param in self.singular:
            re = solve_family(self.family, param, masses, pot)
            out.append((re.m_sq, hamiltonian(re.state, masses, re.geometry, pot)))
        return np.array(out).reshape(-1, 2)


def branch_parameters(
    family: Family,
    n_samples: int,
    q_max: float = L2_Q_MAX,
) -> np.ndarray:
    """Sampling of the natural parameter of a family: q, or θ for the right-angled one."""
    half = 0.5 * math.pi
    if family in (Family.ELLIPTIC_L2, Family.HYPERBOLIC_L2):
        lo, hi = BRANCH_MARGIN, q_max
    elif family == Family.ACUTE:
        lo, hi = BRANCH_MARGIN, half - BRANCH_MARGIN
    elif family == Family.OBTUSE:
        lo, hi = half + BRANCH_MARGIN, math.pi - BRANCH_MARGIN
    elif family == Family.ISOSCELES:
        lo, hi = BRANCH_MARGIN, math.pi - BRANCH_MARGIN
    else:
        lo, hi = BRANCH_MARGIN, half - BRANCH_MARGIN
    return np.linspace(lo, hi, n_samples)


def branch_families(geometry: Geometry, masses: Masses) -> tuple[Family, ...]:
    if geometry == Geometry.LOBACHEVSKY:
        return Family.ELLIPTIC_L2, Family.HYPERBOLIC_L2
    if masses.is_equal:
        return Family.ISOSCELES, Family.RIGHT_ANGLED
    return Family.ACUTE, Family.OBTUSE


def _branch_sample(args: tuple[Family, float, Masses, Potential]) -> tuple | None:
    family, param, masses, pot = args
    try:
        re = solve_family(family, param, masses, pot)
    except (NoSolution, ValidationError) as e:
        logger.debug("%s sample at %g skipped: %s", family.value, param, e)
        return None
    report = classify(re)
    return (
        param,
        re.q,
        re.alpha,
        re.m_sq,
        hamiltonian(re.state, masses, re.geometry, pot),
        report.signature,
        report.verdict.value,
    )


def _family_f(family: Family, param: float, masses: Masses, pot: Potential) -> float:
    re = solve_family(family, param, masses, pot)
    return f_indicator(re.q, re.alpha, re.geometry)


def locate_singular(
    family: Family,
    parameter: np.ndarray,
    masses: Masses,
    pot: Potential,
) -> list[float]:
    """
    Parameters where f vanishes along a family: simple zeros by bisection
    between samples of opposite sign, double zeros by bounded minimisation
    around sampled local minima of f.
    """
    if family == Family.HYPERBOLIC_L2:
        return []

    def f(param: float) -> float:
        return _family_f(family, param, masses, pot)

    values = np.array([f(param) for param in parameter])
    found = []
    for ii in range(len(parameter) - 1):
        if values[ii] == 0.0:
            found.append(float(parameter[ii]))
        elif values[ii] * values[ii + 1] < 0:
            found.append(float(optimize.brentq(f, parameter[ii], parameter[ii + 1], xtol=1e-14)))
    for ii in range(1, len(parameter) - 1):
        if values[ii] > 0 and values[ii] <= values[ii - 1] and values[ii] <= values[ii + 1]:
            result = optimize.minimize_scalar(
                f,
                bounds=(parameter[ii - 1], parameter[ii + 1]),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if abs(result.fun) < SINGULAR_TOL:
                found.append(float(result.x))
    found.sort()
    unique = [x for ii, x in enumerate(found) if ii == 0 or x - found[ii - 1] > 1e-9]
    if unique:
        logger.info("%s: singular RE at %s", family.value, ", ".join(f"{x:.12g}" for x in unique))
    return unique


def branch_curve(
    family: Family | str,
    masses: Masses,
    pot: Potential,
    parameter: Sequence[float],
    jobs: int = 1,
) -> BranchCurve:
    family = Family(family)
    parameter = np.asarray(parameter, dtype=float)
    tasks = [(family, float(param), masses, pot) for param in parameter]
    if jobs > 1:
        with Pool(processes=jobs) as pool:
            samples = pool.map(_branch_sample, tasks)
    else:
        samples = [_branch_sample(task) for task in tasks]
    samples = [sample for sample in samples if sample is not None]
    if not samples:
        raise NoSolution(f"No {family.value} RE on the sampled parameters.")
    params, qs, alphas, cs, hs, sigs, verdicts = zip(*samples)
    params = np.array(params)
    return BranchCurve(
        family=family,
        parameter=params,
        q=np.array(qs),
        alpha=np.array(alphas),
        C=np.array(cs),
        H=np.array(hs),
        signatures=list(sigs),
        verdicts=list(verdicts),
        singular=locate_singular(family, params, masses, pot),
    )


def em_diagram(
    geometry: Geometry | str,
    mu: float,
    pot: Potential | None = None,
    sampling: int = DEFAULT_SAMPLES,
    jobs: int = 1,
    q_max: float = L2_Q_MAX,
) -> list[BranchCurve]:
    """Energy-momentum (C, H) curves of every RE family for μ₁ = 1, μ₂ = 1/μ."""
    geometry = Geometry(geometry)
    if sampling < MIN_SAMPLES:
        raise ValidationError(f"Sampling {sampling} below the minimum of {MIN_SAMPLES} points per branch.")
    masses = Masses.from_ratio(mu)
    pot = gravitational(geometry, 1.0) if pot is None else pot
    return [
        branch_curve(family, masses, pot, branch_parameters(family, sampling, q_max=q_max), jobs=jobs)
        for family in branch_families(geometry, masses)
    ]


def stability_region(mu_grid: Sequence[float], geometry: Geometry | str) -> np.ndarray:
    """Rows (μ, α*, q*) of the boundary of the stable region."""
    geometry = Geometry(geometry)
    rows = []
    for mu in mu_grid:
        alpha_star, q_star = critical_angle(float(mu), geometry)
        rows.append((float(mu), alpha_star, q_star))
    return np.array(rows).reshape(-1, 3)


def in_stable_region(q: float, mu: float, geometry: Geometry | str = Geometry.LOBACHEVSKY) -> bool:
    """Elliptic L² RE (and obtuse S² RE) with q < q*(μ) are stable."""
    return q < critical_angle(mu, geometry)[1]


@dataclass
class NonproperSequence:
    states: list[ReducedState]
    energies: np.ndarray
    casimirs: np.ndarray

    @property
    def q(self) -> np.ndarray:
        return np.array([s.q for s in self.states])


def nonproper_sequence(
    M0: float,
    geometry: Geometry | str,
    masses: Masses,
    pot: Potential,
    q0: float = 1.0,
    n_terms: int = 20,
) -> NonproperSequence:
    """
    States (0, M₀, 0, qₙ, pₙ) with qₙ = q₀2⁻ⁿ on one momentum leaf and one
    energy level: the energy-momentum map is not proper.
    """
    geometry = Geometry(geometry)
    energy_gap = float(pot.eval_u(q0))
    states = []
    for n in range(n_terms):
        q = q0 * 2.0 ** (-n)
        kinetic = energy_gap - float(pot.eval_u(q))
        p = math.sqrt(max(0.0, 2.0 * masses.mu1 * kinetic / (1.0 + masses.mu)))
        states.append(ReducedState(m=np.array([0.0, M0, 0.0]), q=q, p=p))
    return NonproperSequence(
        states=states,
        energies=np.array([hamiltonian(s, masses, geometry, pot) for s in states]),
        casimirs=np.array([casimir(s.m, geometry) for s in states]),
    )


def admissible_scatter(
    geometry: Geometry | str,
    masses: Masses,
    pot: Potential,
    n_samples: int = 5000,
    seed: int = 0,
) -> np.ndarray:
    """Seeded Monte-Carlo sample of (C, H) over random reduced states."""
    geometry = Geometry(geometry)
    rng = np.random.default_rng(seed)
    states = random_states(geometry, n_samples, rng)
    return np.array([
        (casimir(s.m, geometry), hamiltonian(s, masses, geometry, pot)) for s in states
    ]).reshape(-1, 2)


def save_branches(branches: Sequence[BranchCurve], path: Path) -> Path:
    rows = [row for branch in branches for row in branch.rows()]
    return write_csv(rows=rows, header=BRANCH_HEADER, path=path)


def save_polylines(polylines: dict[str, Sequence[np.ndarray]], path: Path, columns: tuple[str, str]) -> Path:
    rows = [
        [name, index, *point]
        for name, segments in polylines.items()
        for index, segment in enumerate(segments)
        for point in np.asarray(segment).reshape(-1, 2)
    ]
    return write_csv(rows=rows, header=("curve", "segment", *columns), path=path)


def em_svg(
    branches: Sequence[BranchCurve],
    path: Path,
    masses: Masses,
    pot: Potential,
    scatter: np.ndarray | None = None,
) -> Path:
    from curved_two_body.plotting import line_figure, save_svg, scatter_figure

    curves = {branch.family.value: [branch.points()] for branch in branches}
    markers = {
        f"{branch.family.value} singular": branch.singular_points(masses, pot)
        for branch in branches if branch.singular
    }
    fig = line_figure(curves, xlabel="C", ylabel="H", markers=markers)
    if scatter is not None:
        scatter_figure(scatter, xlabel="C", ylabel="H", fig_ax=(fig, fig.axes[0]))
    return save_svg(fig, path)


def region_svg(region: np.ndarray, path: Path, geometry: Geometry) -> Path:
    from curved_two_body.plotting import line_figure, save_svg

    fig = line_figure(
        {"q*": [region[:, [0, 2]]]},
        xlabel="mu",
        ylabel="q",
        logx=geometry == Geometry.LOBACHEVSKY,
    )
    return save_svg(fig, path)


def polylines_svg(polylines: dict[str, Sequence[np.ndarray]], path: Path, labels: tuple[str, str]) -> Path:
    from curved_two_body.plotting import line_figure, save_svg

    return save_svg(line_figure(dict(polylines), xlabel=labels[0], ylabel=labels[1]), path)
