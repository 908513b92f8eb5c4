import math

import numpy as np

from curved_two_body import jets
from curved_two_body.charts.andoyer import LeafChart
from curved_two_body.errors import ChartDomainError
from curved_two_body.reduced_core import Geometry


class L2EllipticChart(LeafChart):
    """m = (z, √(M²+z²) sinh α, √(M²+z²) cosh α) on the upper sheet C = M² > 0."""

    def __init__(self, c: float):
        if not c > 0:
            raise ChartDomainError(f"Elliptic leaves need C > 0, got {c}.")
        self.geometry = Geometry.LOBACHEVSKY
        self.c = float(c)

    @property
    def bracket_sign(self) -> int:
        return -1

    def momentum(self, alpha, z):
        rho = jets.sqrt(self.c + z * z)
        return z, rho * jets.sinh(alpha), rho * jets.cosh(alpha)

    def angle(self, m: np.ndarray) -> float:
        if not m[2] > abs(m[1]):
            raise ChartDomainError(f"Momentum {m} is not on the upper elliptic sheet.")
        return math.atanh(m[1] / m[2])

    def contains(self, alpha: float, z: float) -> bool:
        return math.isfinite(alpha) and math.isfinite(z)


class L2HyperbolicChart(LeafChart):
    """m = (z, √(M²−z²) cosh α, √(M²−z²) sinh α) on the leaf C = −M² < 0, m_y > 0."""

    def __init__(self, c: float):
        if not c < 0:
            raise ChartDomainError(f"Hyperbolic leaves need C < 0, got {c}.")
        self.geometry = Geometry.LOBACHEVSKY
        self.c = float(c)

    @property
    def bracket_sign(self) -> int:
        return -1

    def momentum(self, alpha, z):
        rho = jets.sqrt(-self.c - z * z)
        return z, rho * jets.cosh(alpha), rho * jets.sinh(alpha)

    def angle(self, m: np.ndarray) -> float:
        if not m[1] > abs(m[2]):
            raise ChartDomainError(f"Momentum {m} is outside the hyperbolic chart.")
        return math.atanh(m[2] / m[1])

    def contains(self, alpha: float, z: float) -> bool:
        return abs(z) < self.M and math.isfinite(alpha)
