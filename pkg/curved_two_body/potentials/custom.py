from typing import Callable

import numpy as np

from curved_two_body.potentials.gravitational import Potential, TAYLOR_ORDER
from curved_two_body.reduced_core import Geometry

HIGHER_DERIVATIVE_STEP = 1e-3


class CustomPotential(Potential):
    """
    Wraps user supplied maps U, U', U''. Third and fourth derivatives, needed
    only for degree-4 expansions, are taken by central differences of U''.
    """

    def __init__(
        self,
        u: Callable,
        du: Callable,
        ddu: Callable,
        domain: tuple[float, float],
        geometry: Geometry | str | None = None,
        name: str = "custom",
    ):
        self._u = u
        self._du = du
        self._ddu = ddu
        self._domain = (float(domain[0]), float(domain[1]))
        self.geometry = None if geometry is None else Geometry(geometry)
        self.name = name
        self.validate()

    def __repr__(self) -> str:
        return f"CustomPotential(name={self.name!r}, domain={self._domain!r})"

    @property
    def domain(self) -> tuple[float, float]:
        return self._domain

    def eval_u(self, q):
        return self._u(q)

    def eval_du(self, q):
        return self._du(q)

    def eval_ddu(self, q):
        return self._ddu(q)

    def taylor(self, q0: float, order: int = TAYLOR_ORDER) -> np.ndarray:
        h = HIGHER_DERIVATIVE_STEP
        ddu_minus, ddu_0, ddu_plus = (float(self._ddu(q0 + x)) for x in (-h, 0.0, h))
        derivatives = [
            float(self._u(q0)),
            float(self._du(q0)),
            ddu_0,
            (ddu_plus - ddu_minus) / (2 * h),
            (ddu_plus - 2 * ddu_0 + ddu_minus) / h ** 2,
        ]
        factorials = [1.0, 1.0, 2.0, 6.0, 24.0]
        coefficients = np.zeros(order + 1)
        for k in range(min(order, 4) + 1):
            coefficients[k] = derivatives[k] / factorials[k]
        return coefficients


def custom(
    u: Callable,
    du: Callable,
    ddu: Callable,
    domain: tuple[float, float],
    geometry: Geometry | str | None = None,
) -> CustomPotential:
    return CustomPotential(u=u, du=du, ddu=ddu, domain=domain, geometry=geometry)
