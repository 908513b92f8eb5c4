from dataclasses import dataclass
import logging
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from curved_two_body.errors import SingularityApproach, StepFailure, ValidationError
from curved_two_body.potentials import Potential
from curved_two_body.reduced_core import (
    Geometry,
    Masses,
    ReducedState,
    casimir,
    check_q,
    hamiltonian,
    vector_field_array,
)
from curved_two_body.serializer import write_csv

logger = logging.getLogger(__name__)

TOL_MIN = 1e-14
TOL_MAX = 1e-3
RTOL_FLOOR = 100 * np.finfo(float).eps
SAFETY_MARGIN = 1e-6
DEFAULT_SAMPLES = 1001
METHOD = "DOP853"
TRAJECTORY_HEADER = ("t", "m_x", "m_y", "m_z", "q", "p", "H", "C")


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[ReducedState]
    energies: np.ndarray
    casimirs: np.ndarray
    energy_drift: float
    casimir_drift: float
    masses: Masses
    geometry: Geometry
    potential: Potential
    tol: float
    quadrature: np.ndarray | None = None

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("Trajectory times and states differ in length.")
        if len(self.times) > 1 and not np.all(np.diff(self.times) * np.sign(self.times[-1] - self.times[0]) > 0):
            raise ValueError("Trajectory times are not strictly monotone.")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def array(self) -> np.ndarray:
        return np.array([s.as_array() for s in self.states])

    def rows(self) -> list[list[float]]:
        return [
            [t, *s.m, s.q, s.p, h, c]
            for t, s, h, c in zip(self.times, self.states, self.energies, self.casimirs)
        ]

    def to_csv(self, path: Path) -> Path:
        return write_csv(rows=self.rows(), header=TRAJECTORY_HEADER, path=path)


def scaled_drift(values: np.ndarray) -> float:
    """max|X(t) - X(0)| divided by max(|X(0)|, 1): relative for |X(0)| >= 1, absolute below."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values - values[0])) / max(abs(values[0]), 1.0))


def safety_bounds(geometry: Geometry, margin: float = SAFETY_MARGIN) -> tuple[float, float]:
    lo, hi = geometry.q_domain
    return lo + margin, hi - margin


def integrate(
    s0: ReducedState,
    t_end: float,
    tol: float,
    masses: Masses,
    geometry: Geometry,
    pot: Potential,
    t_eval: Sequence[float] | None = None,
    n_samples: int = DEFAULT_SAMPLES,
    q_bounds: tuple[float, float] | None = None,
    quadrature: Callable[[np.ndarray], np.ndarray] | None = None,
) -> Trajectory:
    """
    Integrates the reduced equations from s0 up to t_end (negative t_end
    integrates backwards) with the DOP853 embedded Runge-Kutta pair.

    ``quadrature`` maps a reduced state vector to the rates of extra
    variables (e.g. Euler angles) which are integrated alongside the flow,
    starting from zero.
    """
    if not TOL_MIN <= tol <= TOL_MAX:
        raise ValidationError(f"Tolerance {tol} outside [{TOL_MIN}, {TOL_MAX}].")
    check_q(s0.q, geometry)
    q_min, q_max = q_bounds if q_bounds is not None else safety_bounds(geometry)
    if not q_min < s0.q < q_max:
        raise SingularityApproach(t=0.0, q=s0.q)

    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, n_samples) if t_end != 0 else np.array([0.0])
    t_eval = np.asarray(t_eval, dtype=float)

    n_extra = 0 if quadrature is None else len(np.atleast_1d(quadrature(s0.as_array())))
    y0 = np.concatenate([s0.as_array(), np.zeros(n_extra)])

    if t_end == 0:
        t_eval = np.array([0.0])
        values = y0[:, None]
    else:
        def rhs(t, y):
            dy = vector_field_array(y[:5], masses, geometry, pot)
            if quadrature is None:
                return dy
            return np.concatenate([dy, np.atleast_1d(quadrature(y[:5]))])

        def leave_below(t, y):
            return y[3] - q_min

        def leave_above(t, y):
            return q_max - y[3]

        for event in (leave_below, leave_above):
            event.terminal = True

        solution = solve_ivp(
            fun=rhs,
            t_span=(0.0, t_end),
            y0=y0,
            method=METHOD,
            t_eval=t_eval,
            rtol=max(tol, RTOL_FLOOR),
            atol=tol,
            events=(leave_below, leave_above),
        )
        logger.debug(
            "%s integration to t=%g: status %d, %d evaluations",
            METHOD, t_end, solution.status, solution.nfev,
        )
        if solution.status == -1:
            raise StepFailure(solution.message)
        if solution.status == 1:
            t_hit = next(float(te[0]) for te in solution.t_events if len(te))
            y_hit = next(ye[0] for ye in solution.y_events if len(ye))
            raise SingularityApproach(t=t_hit, q=float(y_hit[3]))
        t_eval = solution.t
        values = solution.y

    states = [ReducedState.from_array(column[:5]) for column in values.T]
    energies = np.array([hamiltonian(s, masses, geometry, pot) for s in states])
    casimirs = np.array([casimir(s.m, geometry) for s in states])
    return Trajectory(
        times=t_eval,
        states=states,
        energies=energies,
        casimirs=casimirs,
        energy_drift=scaled_drift(energies),
        casimir_drift=scaled_drift(casimirs),
        masses=masses,
        geometry=geometry,
        potential=pot,
        tol=tol,
        quadrature=None if quadrature is None else values[5:].T.copy(),
    )
