"""
Reduced Poisson system of two point masses on the sphere S² or on the
Lobachevsky plane L² (hyperboloid model).

The reduced phase space has coordinates (m, q, p): m is the body angular
momentum, q the separation of the masses and p its conjugate momentum. The
sign σ = +1 (S²) or −1 (L²) threads through the Hamiltonian,

    H = (1/2μ₁)[(m, A(q)m) + 2σ m_x p + (1+μ)p²] + U(q),

and through the Lie–Poisson part of the bracket: ṁ = m × ∂H/∂m on S²,
ṁ = (Km) × ∂H/∂m on L².
"""
from dataclasses import dataclass, field
from enum import Enum
import logging
import math
from typing import TYPE_CHECKING

import numpy as np

from curved_two_body import jets
from curved_two_body.errors import DomainError, ValidationError

if TYPE_CHECKING:
    from curved_two_body.potentials import Potential

logger = logging.getLogger(__name__)

DOMAIN_MARGIN = 1e-8
EQUAL_MASS_TOL = 1e-12


class Geometry(str, Enum):
    SPHERE = "s2"
    LOBACHEVSKY = "l2"

    @property
    def sign(self) -> int:
        return 1 if self == Geometry.SPHERE else -1

    @property
    def metric(self) -> np.ndarray:
        return np.diag([1.0, 1.0, float(self.sign)])

    @property
    def q_domain(self) -> tuple[float, float]:
        return (0.0, math.pi) if self == Geometry.SPHERE else (0.0, math.inf)

    def sn(self, x):
        return jets.sin(x) if self == Geometry.SPHERE else jets.sinh(x)

    def cs(self, x):
        return jets.cos(x) if self == Geometry.SPHERE else jets.cosh(x)


@dataclass(frozen=True)
class Masses:
    mu1: float
    mu2: float

    def __post_init__(self):
        if not (self.mu1 > 0 and self.mu2 > 0):
            raise ValidationError(f"Masses must be positive, got ({self.mu1}, {self.mu2}).")

    @classmethod
    def from_ratio(cls, mu: float) -> "Masses":
        if not mu > 0:
            raise ValidationError(f"Mass ratio must be positive, got {mu}.")
        return cls(mu1=1.0, mu2=1.0 / mu)

    @property
    def mu(self) -> float:
        return self.mu1 / self.mu2

    @property
    def is_equal(self) -> bool:
        return abs(self.mu - 1.0) <= EQUAL_MASS_TOL

    def swapped(self) -> "Masses":
        return Masses(mu1=self.mu2, mu2=self.mu1)


@dataclass(frozen=True)
class ReducedState:
    m: np.ndarray
    q: float
    p: float = 0.0

    def __post_init__(self):
        m = np.array(self.m, dtype=float).reshape(3)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "p", float(self.p))
        if not (np.all(np.isfinite(m)) and math.isfinite(self.q) and math.isfinite(self.p)):
            raise ValidationError(f"Non-finite reduced state {self.as_array()}.")

    @classmethod
    def from_array(cls, y: np.ndarray) -> "ReducedState":
        return cls(m=y[:3], q=y[3], p=y[4])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.m, [self.q, self.p]])

    def reversed(self) -> "ReducedState":
        return ReducedState(m=-self.m, q=self.q, p=-self.p)


def check_q(q: float, geometry: Geometry, margin: float = DOMAIN_MARGIN) -> None:
    lo, hi = geometry.q_domain
    if not (lo + margin < q < hi - margin):
        raise DomainError(
            f"Separation q={q!r} outside ({lo + margin}, {hi - margin}) for {geometry.value}."
        )


def a_matrix(q: float, mu: float, geometry: Geometry) -> np.ndarray:
    check_q(q, geometry)
    a23, a33 = _a_entries(q, mu, geometry)
    return np.array([
        [1.0, 0.0, 0.0],
        [0.0, 1.0, a23],
        [0.0, a23, a33],
    ])


def _a_entries(q, mu: float, geometry: Geometry):
    s = geometry.sn(q)
    c = geometry.cs(q)
    return geometry.sign * c / s, (mu + c * c) / (s * s)


def hamiltonian_components(mx, my, mz, q, p, masses: Masses, geometry: Geometry, pot: "Potential"):
    """
    The Hamiltonian written on scalar components; works with floats, numpy
    arrays and jets alike.
    """
    a23, a33 = _a_entries(q, masses.mu, geometry)
    quadratic = mx * mx + my * my + 2.0 * a23 * my * mz + a33 * mz * mz
    kinetic = (quadratic + 2.0 * geometry.sign * mx * p + (1.0 + masses.mu) * p * p) / (2.0 * masses.mu1)
    return kinetic + pot.evaluate(q)


def hamiltonian(s: ReducedState, masses: Masses, geometry: Geometry, pot: "Potential") -> float:
    check_q(s.q, geometry)
    return float(hamiltonian_components(*s.m, s.q, s.p, masses, geometry, pot))


def casimir(m: np.ndarray, geometry: Geometry) -> float:
    m = np.asarray(m, dtype=float)
    if geometry == Geometry.SPHERE:
        return float(m @ m)
    return float(-m[0] ** 2 - m[1] ** 2 + m[2] ** 2)


def casimir_gradient(m: np.ndarray, geometry: Geometry) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if geometry == Geometry.SPHERE:
        return 2.0 * m
    return np.array([-2.0 * m[0], -2.0 * m[1], 2.0 * m[2]])


def _gradient_array(y: np.ndarray, masses: Masses, geometry: Geometry, pot: "Potential") -> np.ndarray:
    mx, my, mz, q, p = y
    sigma = geometry.sign
    mu = masses.mu
    s = float(geometry.sn(q))
    c = float(geometry.cs(q))
    a23 = sigma * c / s
    a33 = (mu + c * c) / (s * s)
    omega = np.array([
        mx + sigma * p,
        my + a23 * mz,
        a23 * my + a33 * mz,
    ]) / masses.mu1
    dq = -(sigma * my * mz / s ** 2 + (1.0 + mu) * c * mz ** 2 / s ** 3) / masses.mu1
    dq += float(pot.eval_du(q))
    dp = (sigma * mx + (1.0 + mu) * p) / masses.mu1
    return np.array([omega[0], omega[1], omega[2], dq, dp])


def hamiltonian_gradient(s: ReducedState, masses: Masses, geometry: Geometry, pot: "Potential") -> np.ndarray:
    """Returns (∂H/∂m_x, ∂H/∂m_y, ∂H/∂m_z, ∂H/∂q, ∂H/∂p)."""
    check_q(s.q, geometry)
    return _gradient_array(s.as_array(), masses, geometry, pot)


def _hat(v: np.ndarray) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def poisson_tensor(s: ReducedState, geometry: Geometry) -> np.ndarray:
    """Structure matrix P with ṡ = P ∇H in the coordinates (m, q, p)."""
    tensor = np.zeros((5, 5))
    tensor[:3, :3] = _hat(geometry.metric @ s.m)
    tensor[3, 4] = 1.0
    tensor[4, 3] = -1.0
    return tensor


def vector_field_array(y: np.ndarray, masses: Masses, geometry: Geometry, pot: "Potential") -> np.ndarray:
    grad = _gradient_array(y, masses, geometry, pot)
    m = y[:3]
    if geometry == Geometry.LOBACHEVSKY:
        m = np.array([m[0], m[1], -m[2]])
    dm = np.cross(m, grad[:3])
    return np.array([dm[0], dm[1], dm[2], grad[4], -grad[3]])


def vector_field(s: ReducedState, masses: Masses, geometry: Geometry, pot: "Potential") -> np.ndarray:
    check_q(s.q, geometry)
    return vector_field_array(s.as_array(), masses, geometry, pot)


@dataclass
class BracketReport:
    geometry: Geometry
    max_residual: float
    casimir_residual: float
    jacobi_residual: float
    n_states: int = field(default=0)


def _finite_difference_gradient(
    y: np.ndarray,
    masses: Masses,
    geometry: Geometry,
    pot: "Potential",
    h: float = 1e-3,
) -> np.ndarray:
    grad = np.zeros(5)
    weights = ((-2, 1.0 / 12), (-1, -8.0 / 12), (1, 8.0 / 12), (2, -1.0 / 12))
    for ii in range(5):
        for step, w in weights:
            shifted = y.copy()
            shifted[ii] += step * h
            grad[ii] += w * float(hamiltonian_components(*shifted, masses, geometry, pot)) / h
    return grad


def structure_constants(geometry: Geometry) -> np.ndarray:
    """c[i, j, k] with {m_i, m_j} = Σ_k c[i, j, k] m_k."""
    constants = np.zeros((3, 3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        constants[:, :, k] = _hat(geometry.metric @ e)
    return constants


def jacobi_residual(geometry: Geometry) -> float:
    c = structure_constants(geometry)
    total = np.zeros(3)
    for i, j, l in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        # {m_i, {m_j, m_l}}
        total += np.einsum("k,kn->n", c[j, l, :], c[i, :, :])
    return float(np.max(np.abs(total)))


def random_states(
    geometry: Geometry,
    n_states: int,
    rng: np.random.Generator,
    q_range: tuple[float, float] | None = None,
) -> list[ReducedState]:
    if q_range is None:
        q_range = (0.9, 2.2) if geometry == Geometry.SPHERE else (0.9, 3.0)
    ms = rng.normal(size=(n_states, 3))
    qs = rng.uniform(*q_range, size=n_states)
    ps = rng.normal(size=n_states)
    return [ReducedState(m=m, q=q, p=p) for m, q, p in zip(ms, qs, ps)]


def bracket_check(
    geometry: Geometry,
    masses: Masses | None = None,
    pot: "Potential | None" = None,
    n_states: int = 100,
    seed: int = 0,
) -> BracketReport:
    """
    Compares the analytic vector field with P(m)∇H, where ∇H is taken by
    finite differences, on random states. Also reports the Casimir residual
    ∇C·ṁ and the Jacobi identity on the coordinate functions.
    """
    if masses is None:
        masses = Masses(mu1=1.0, mu2=1.0 / 0.7)
    if pot is None:
        from curved_two_body.potentials import gravitational
        pot = gravitational(geometry=geometry, k=1.0)
    rng = np.random.default_rng(seed)
    max_residual = 0.0
    casimir_residual = 0.0
    for s in random_states(geometry, n_states, rng):
        field_value = vector_field(s, masses, geometry, pot)
        grad = _finite_difference_gradient(s.as_array(), masses, geometry, pot)
        bracket_flow = poisson_tensor(s, geometry) @ grad
        scale = max(1.0, float(np.max(np.abs(field_value))))
        max_residual = max(max_residual, float(np.max(np.abs(field_value - bracket_flow))) / scale)
        dc = float(casimir_gradient(s.m, geometry) @ field_value[:3])
        casimir_residual = max(casimir_residual, abs(dc) / scale)
    logger.debug(
        "bracket check %s: residual %.3e, casimir %.3e",
        geometry.value, max_residual, casimir_residual,
    )
    return BracketReport(
        geometry=geometry,
        max_residual=max_residual,
        casimir_residual=casimir_residual,
        jacobi_residual=jacobi_residual(geometry),
        n_states=n_states,
    )
