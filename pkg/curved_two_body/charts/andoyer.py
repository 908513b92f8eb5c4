from abc import ABC, abstractmethod
from enum import Enum
import math
from typing import Sequence

import numpy as np

from curved_two_body import jets
from curved_two_body.errors import ChartDomainError
from curved_two_body.reduced_core import Geometry, ReducedState, casimir, poisson_tensor

POISSON_CHECK_STEP = 1e-6


class LeafChart(ABC):
    geometry: Geometry
    c: float

    @property
    @abstractmethod
    def bracket_sign(self) -> int:
        """
        Value of {α, z} in the reduced bracket; (α, bracket_sign·z) is canonical.
        """
        ...

    @abstractmethod
    def momentum(self, alpha, z):
        """
        Returns (m_x, m_y, m_z) on the leaf; accepts floats and jets.
        """
        ...

    @abstractmethod
    def angle(self, m: np.ndarray) -> float:
        """
        Chart angle α of a momentum on the leaf.
        """
        ...

    @abstractmethod
    def contains(self, alpha: float, z: float) -> bool:
        """
        True if (α, z) lies in the chart domain.
        """
        ...

    @property
    def M(self) -> float:
        return math.sqrt(abs(self.c))

    def check(self, alpha: float, z: float) -> None:
        if not self.contains(alpha, z):
            raise ChartDomainError(
                f"Leaf point (alpha={alpha!r}, z={z!r}) outside the {type(self).__name__} domain."
            )

    def to_state(self, leaf_point: Sequence[float]) -> ReducedState:
        alpha, q, z, p = (float(x) for x in leaf_point)
        self.check(alpha, z)
        return ReducedState(m=np.array(self.momentum(alpha, z), dtype=float), q=q, p=p)

    def from_state(self, s: ReducedState) -> np.ndarray:
        return np.array([self.angle(s.m), s.q, s.m[0], s.p])

    def poisson_check(self, leaf_point: Sequence[float], h: float = POISSON_CHECK_STEP) -> float:
        """{α, z} computed numerically from the reduced Poisson tensor at a leaf point."""
        s = self.to_state(leaf_point)
        grad_alpha = np.zeros(5)
        for ii in range(3):
            step = np.zeros(3)
            step[ii] = h
            grad_alpha[ii] = (self.angle(s.m + step) - self.angle(s.m - step)) / (2 * h)
        grad_z = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
        return float(grad_alpha @ poisson_tensor(s, self.geometry) @ grad_z)

    def on_leaf(self, s: ReducedState, tol: float = 1e-9) -> bool:
        return abs(casimir(s.m, self.geometry) - self.c) <= tol * max(1.0, abs(self.c))


class SphereAndoyerChart(LeafChart):
    """m = (z, √(M²−z²) sin α, √(M²−z²) cos α) on the sphere |m|² = M²."""

    def __init__(self, c: float):
        if not c > 0:
            raise ChartDomainError(f"Sphere leaves need C > 0, got {c}.")
        self.geometry = Geometry.SPHERE
        self.c = float(c)

    @property
    def bracket_sign(self) -> int:
        return 1

    def momentum(self, alpha, z):
        rho = jets.sqrt(self.c - z * z)
        return z, rho * jets.sin(alpha), rho * jets.cos(alpha)

    def angle(self, m: np.ndarray) -> float:
        return math.atan2(m[1], m[2])

    def contains(self, alpha: float, z: float) -> bool:
        return abs(z) < self.M


class ChartEnum(str, Enum):
    SPHERE_ANDOYER = "sphere_andoyer"
    L2_ELLIPTIC = "l2_elliptic"
    L2_HYPERBOLIC = "l2_hyperbolic"


def chart(kind: ChartEnum | str, c: float) -> LeafChart:

    if kind == ChartEnum.SPHERE_ANDOYER:
        return SphereAndoyerChart(c=c)
    elif kind == ChartEnum.L2_ELLIPTIC:
        from curved_two_body.charts.lobachevsky import L2EllipticChart
        return L2EllipticChart(c=c)
    elif kind == ChartEnum.L2_HYPERBOLIC:
        from curved_two_body.charts.lobachevsky import L2HyperbolicChart
        return L2HyperbolicChart(c=c)
    else:
        raise ValueError(f"Chart {kind} not known.")
