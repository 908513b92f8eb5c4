from abc import ABC, abstractmethod
from enum import Enum
import math

import numpy as np

from curved_two_body import jets
from curved_two_body.errors import AttractivityViolation, ValidationError
from curved_two_body.reduced_core import Geometry

VALIDATION_POINTS = 1000
VALIDATION_MIN_OFFSET = 1e-6
VALIDATION_MAX_SPAN = 1e2
DERIVATIVE_CHECK_POINTS = 100
DERIVATIVE_CHECK_STEP = 1e-5
TAYLOR_ORDER = 4


class Potential(ABC):
    geometry: Geometry | None

    @abstractmethod
    def eval_u(self, q):
        """
        Energy U(q).
        """
        ...

    @abstractmethod
    def eval_du(self, q):
        """
        First derivative U'(q), positive on the whole domain.
        """
        ...

    @abstractmethod
    def eval_ddu(self, q):
        """
        Second derivative U''(q).
        """
        ...

    @property
    @abstractmethod
    def domain(self) -> tuple[float, float]:
        """
        Open interval on which the potential is defined.
        """
        ...

    @abstractmethod
    def taylor(self, q0: float, order: int = TAYLOR_ORDER) -> np.ndarray:
        """
        Taylor coefficients U^(k)(q0)/k! for k = 0..order.
        """
        ...

    def evaluate(self, q):
        if isinstance(q, jets.Jet):
            return q.compose_series(self.taylor(q.value, q.degree))
        return self.eval_u(q)

    def validate(self, grid: np.ndarray | None = None) -> None:
        if grid is None:
            grid = attractivity_grid(self.domain)
        du = np.broadcast_to(np.asarray(self.eval_du(grid), dtype=float), np.shape(grid))
        bad = np.flatnonzero(~(du > 0))
        if bad.size:
            raise AttractivityViolation(q=float(grid[bad[0]]))

    def derivative_residual(self, grid: np.ndarray | None = None, h: float = DERIVATIVE_CHECK_STEP) -> float:
        """
        max |(U(q+h) - U(q-h))/(2h) - U'(q)| / (1 + |U'(q)|) over a grid kept
        away from the ends of the domain.
        """
        if grid is None:
            lo, hi = self.domain
            hi = min(hi, lo + 10.0)
            grid = np.linspace(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), DERIVATIVE_CHECK_POINTS)
        du = np.broadcast_to(np.asarray(self.eval_du(grid), dtype=float), np.shape(grid))
        fd = (np.asarray(self.eval_u(grid + h)) - np.asarray(self.eval_u(grid - h))) / (2 * h)
        return float(np.max(np.abs(fd - du) / (1.0 + np.abs(du))))


def attractivity_grid(domain: tuple[float, float], n_points: int = VALIDATION_POINTS) -> np.ndarray:
    lo, hi = domain
    if math.isfinite(hi):
        half = 0.5 * (hi - lo)
        offsets = np.geomspace(VALIDATION_MIN_OFFSET, half, n_points // 2)
        return np.sort(np.concatenate([lo + offsets, hi - offsets]))
    return lo + np.geomspace(VALIDATION_MIN_OFFSET, VALIDATION_MAX_SPAN, n_points)


class GravitationalPotential(Potential):
    """U = -k cot q on S² and U = -k coth q on L²."""

    def __init__(self, geometry: Geometry | str, k: float = 1.0):
        if not k > 0:
            raise ValidationError(f"Coupling k must be positive, got {k}.")
        self.geometry = Geometry(geometry)
        self.k = float(k)

    def __repr__(self) -> str:
        return f"GravitationalPotential(geometry={self.geometry.value!r}, k={self.k!r})"

    @property
    def domain(self) -> tuple[float, float]:
        return self.geometry.q_domain

    def eval_u(self, q):
        return -self.k * self.geometry.cs(q) / self.geometry.sn(q)

    def eval_du(self, q):
        return self.k / self.geometry.sn(q) ** 2

    def eval_ddu(self, q):
        s = self.geometry.sn(q)
        return -2.0 * self.k * self.geometry.cs(q) / s ** 3

    def taylor(self, q0: float, order: int = TAYLOR_ORDER) -> np.ndarray:
        q = jets.Jet.variable(0, q0, nvars=1, degree=order)
        return self.eval_u(q).coefficients.copy()


class PotentialEnum(str, Enum):
    GRAVITATIONAL = "gravitational"
    CUSTOM = "custom"
    TABULATED = "tabulated"


def gravitational(geometry: Geometry | str, k: float = 1.0) -> GravitationalPotential:
    return GravitationalPotential(geometry=geometry, k=k)


def potential(kind: PotentialEnum | str, **kwargs) -> Potential:

    if kind == PotentialEnum.GRAVITATIONAL:
        return GravitationalPotential(**kwargs)
    elif kind == PotentialEnum.CUSTOM:
        from curved_two_body.potentials.custom import CustomPotential
        return CustomPotential(**kwargs)
    elif kind == PotentialEnum.TABULATED:
        from curved_two_body.potentials.tabulated import TabulatedPotential
        return TabulatedPotential(**kwargs)
    else:
        raise ValueError(f"Potential {kind} not known.")
