from pathlib import Path

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from curved_two_body.potentials.gravitational import Potential, TAYLOR_ORDER
from curved_two_body.reduced_core import Geometry


class TabulatedPotential(Potential):
    """
    Potential read from a table of (q, U, U') nodes and interpolated with a
    cubic Hermite spline, so U' is exactly the derivative of U.
    """

    def __init__(
        self,
        q: np.ndarray,
        u: np.ndarray,
        du: np.ndarray,
        geometry: Geometry | str | None = None,
    ):
        q = np.asarray(q, dtype=float)
        order = np.argsort(q)
        self._nodes = q[order]
        self._spline = CubicHermiteSpline(
            self._nodes, np.asarray(u, dtype=float)[order], np.asarray(du, dtype=float)[order]
        )
        self._derivatives = [self._spline.derivative(k) for k in range(1, 4)]
        self.geometry = None if geometry is None else Geometry(geometry)
        self.validate(grid=self._nodes)
        self.validate(grid=np.linspace(self._nodes[0], self._nodes[-1], 1000))

    @classmethod
    def from_csv(cls, path: Path | str, geometry: Geometry | str | None = None) -> "TabulatedPotential":
        table = np.atleast_2d(np.genfromtxt(path, delimiter=",", comments="#"))
        # a text header row parses as nan
        table = table[~np.isnan(table).any(axis=1)] if table.shape[1] >= 3 else table
        if table.shape[1] < 3:
            raise ValueError(f"Potential table {path} needs columns q, U, dU.")
        return cls(q=table[:, 0], u=table[:, 1], du=table[:, 2], geometry=geometry)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self._nodes[0]), float(self._nodes[-1])

    def eval_u(self, q):
        return self._spline(q)

    def eval_du(self, q):
        return self._derivatives[0](q)

    def eval_ddu(self, q):
        return self._derivatives[1](q)

    def taylor(self, q0: float, order: int = TAYLOR_ORDER) -> np.ndarray:
        coefficients = np.zeros(order + 1)
        values = [float(self._spline(q0))] + [float(d(q0)) for d in self._derivatives]
        factorial = 1.0
        for k in range(min(order, 3) + 1):
            factorial *= max(k, 1)
            coefficients[k] = values[k] / factorial
        return coefficients


def tabulated(path: Path | str, geometry: Geometry | str | None = None) -> TabulatedPotential:
    return TabulatedPotential.from_csv(path=path, geometry=geometry)
