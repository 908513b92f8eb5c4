"""
Lift reduced trajectories to the ambient motion of the two masses.

The body frame carries μ₁ at r₁ = (0, 0, 1) and μ₂ at r₂ = (0, s(q), c(q)).
A group element g (SO(3) on S², SO(2,1) on L²) maps it to the fixed frame,
R_a = g r_a, and m = g⁻¹M for the conserved fixed-frame momentum M. The
Euler angles determined by m are read off pointwise and the remaining cyclic
angle comes from a quadrature integrated alongside the reduced flow.
"""
from dataclasses import dataclass
from enum import Enum
import logging
import math
from pathlib import Path
from typing import Callable

import numpy as np

from curved_two_body.errors import ChartBreakdown, ValidationError
from curved_two_body.integrator import Trajectory, integrate
from curved_two_body.reduced_core import (
    Geometry,
    ReducedState,
    _gradient_array,
    _hat,
    casimir,
    hamiltonian,
)
from curved_two_body.rel_equilibria import Family, RelativeEquilibrium
from curved_two_body.serializer import write_csv

logger = logging.getLogger(__name__)

CASIMIR_TOL = 1e-9
CHART_MARGIN = 1e-9


class EulerChart(str, Enum):
    SPHERE = "sphere"
    L2_ELLIPTIC = "l2_elliptic"
    L2_HYPERBOLIC = "l2_hyperbolic"

    @property
    def angle_names(self) -> tuple[str, str, str]:
        if self == EulerChart.L2_HYPERBOLIC:
            return "kappa", "psi", "theta"
        return "theta", "phi", "psi"

    @property
    def geometry(self) -> Geometry:
        return Geometry.SPHERE if self == EulerChart.SPHERE else Geometry.LOBACHEVSKY


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_x(angle: float, geometry: Geometry) -> np.ndarray:
    """Rotation about X on S², hyperbolic rotation (boost in the YZ plane) on L²."""
    if geometry == Geometry.SPHERE:
        c, s = math.cos(angle), math.sin(angle)
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    c, s = math.cosh(angle), math.sinh(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, s, c]])


def body_positions(q: float, geometry: Geometry) -> tuple[np.ndarray, np.ndarray]:
    return np.array([0.0, 0.0, 1.0]), np.array([0.0, float(geometry.sn(q)), float(geometry.cs(q))])


def _body_velocity2(q: float, q_dot: float, geometry: Geometry) -> np.ndarray:
    return q_dot * np.array([0.0, float(geometry.cs(q)), -geometry.sign * float(geometry.sn(q))])


def minkowski(u: np.ndarray, v: np.ndarray, geometry: Geometry) -> np.ndarray:
    """⟨u, v⟩ on the last axis: Euclidean on S², Minkowski (+, +, −) on L²."""
    return np.einsum("...i,i,...i->...", u, np.diag(geometry.metric), v)


@dataclass
class EulerAngles:
    chart: EulerChart
    first: np.ndarray
    second: np.ndarray
    third: np.ndarray

    def angle(self, name: str) -> np.ndarray:
        names = self.chart.angle_names
        if name not in names:
            raise ValueError(f"Angle {name} not known for the {self.chart.value} chart.")
        return (self.first, self.second, self.third)[names.index(name)]

    @property
    def theta(self) -> np.ndarray:
        return self.angle("theta")

    @property
    def phi(self) -> np.ndarray:
        return self.angle("phi")

    @property
    def psi(self) -> np.ndarray:
        return self.angle("psi")

    @property
    def kappa(self) -> np.ndarray:
        return self.angle("kappa")

    def matrix(self, index: int) -> np.ndarray:
        a, b, c = self.first[index], self.second[index], self.third[index]
        geometry = self.chart.geometry
        if self.chart == EulerChart.L2_HYPERBOLIC:
            # g = R^X_κ R^Z_ψ R^X_θ
            return rot_x(a, geometry) @ rot_z(b) @ rot_x(c, geometry)
        # g = R^Z_ψ R^X_θ R^Z_φ
        theta, phi, psi = a, b, c
        return rot_z(psi) @ rot_x(theta, geometry) @ rot_z(phi)


@dataclass
class AmbientTrajectory:
    times: np.ndarray
    chart: EulerChart
    angles: EulerAngles
    frames: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    momentum: np.ndarray
    reduced: Trajectory
    states: list[ReducedState]
    M0: float

    @property
    def geometry(self) -> Geometry:
        return self.chart.geometry

    @property
    def M(self) -> np.ndarray:
        return self.momentum[0]

    @property
    def constraint_drift(self) -> float:
        target = 1.0 if self.geometry == Geometry.SPHERE else -1.0
        return float(max(
            np.max(np.abs(minkowski(self.R1, self.R1, self.geometry) - target)),
            np.max(np.abs(minkowski(self.R2, self.R2, self.geometry) - target)),
        ))

    @property
    def momentum_drift(self) -> float:
        return float(np.max(np.abs(self.momentum - self.momentum[0])) / max(1.0, self.M0))

    @property
    def group_drift(self) -> float:
        """max ‖gᵀKg − K‖ over the samples."""
        metric = self.geometry.metric
        return float(max(
            np.max(np.abs(g.T @ metric @ g - metric)) for g in self.frames
        ))

    def separations(self) -> np.ndarray:
        products = minkowski(self.R1, self.R2, self.geometry)
        if self.geometry == Geometry.SPHERE:
            return np.arccos(np.clip(products, -1.0, 1.0))
        return np.arccosh(np.maximum(-products, 1.0))

    def rows(self) -> list[list[float]]:
        return [
            [t, a, b, c, *r1, *r2]
            for t, a, b, c, r1, r2 in zip(
                self.times, self.angles.first, self.angles.second, self.angles.third, self.R1, self.R2,
            )
        ]

    def header(self) -> tuple[str, ...]:
        return (
            "t", *self.chart.angle_names,
            "R1_x", "R1_y", "R1_z", "R2_x", "R2_y", "R2_z",
        )

    def to_csv(self, path: Path) -> Path:
        return write_csv(rows=self.rows(), header=self.header(), path=path)

    def projection(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) on S²; Poincaré-disk coordinates on L²."""
        if self.geometry == Geometry.SPHERE:
            return self.R1[:, :2], self.R2[:, :2]
        return (
            self.R1[:, :2] / (1.0 + self.R1[:, 2:]),
            self.R2[:, :2] / (1.0 + self.R2[:, 2:]),
        )

    def to_svg(self, path: Path) -> Path:
        from curved_two_body.plotting import line_figure, save_svg

        p1, p2 = self.projection()
        fig = line_figure({"mu1": [p1], "mu2": [p2]}, xlabel="X", ylabel="Y")
        return save_svg(fig, path)


def _check_leaf(traj: Trajectory, M0: float, sign: int) -> None:
    target = sign * M0 ** 2
    for t, s in zip(traj.times, traj.states):
        c = casimir(s.m, traj.geometry)
        if abs(c - target) > CASIMIR_TOL * max(1.0, M0 ** 2):
            raise ValidationError(f"Casimir {c!r} at t={t!r} differs from {target!r}.")


def _default_m0(traj: Trajectory, M0: float | None) -> float:
    if M0 is None:
        M0 = math.sqrt(abs(traj.casimirs[0]))
    if not M0 > 0:
        raise ValidationError(f"Momentum magnitude must be positive, got {M0!r}.")
    return float(M0)


def _lift(
    traj: Trajectory,
    quadrature: Callable[[np.ndarray], np.ndarray],
) -> tuple[np.ndarray, list[ReducedState], np.ndarray]:
    """Re-integrates the reduced flow with the quadrature attached; returns (times, states, angle)."""
    times = np.asarray(traj.times, dtype=float)
    lifted = integrate(
        s0=traj.states[0],
        t_end=float(times[-1]),
        tol=traj.tol,
        masses=traj.masses,
        geometry=traj.geometry,
        pot=traj.potential,
        t_eval=times,
        quadrature=quadrature,
    )
    return lifted.times, lifted.states, lifted.quadrature[:, 0]


def _chart_margin(value: float, M0: float) -> bool:
    return abs(value) < M0 * (1.0 - CHART_MARGIN)


def _ambient(
    traj: Trajectory,
    chart: EulerChart,
    times: np.ndarray,
    states: list[ReducedState],
    angles: EulerAngles,
    M0: float,
) -> AmbientTrajectory:
    geometry = chart.geometry
    frames = np.array([angles.matrix(ii) for ii in range(len(times))])
    body = [body_positions(s.q, geometry) for s in states]
    R1 = np.einsum("nij,nj->ni", frames, np.array([b[0] for b in body]))
    R2 = np.einsum("nij,nj->ni", frames, np.array([b[1] for b in body]))
    momentum = np.einsum("nij,nj->ni", frames, np.array([s.m for s in states]))
    ambient = AmbientTrajectory(
        times=times,
        chart=chart,
        angles=angles,
        frames=frames,
        R1=R1,
        R2=R2,
        momentum=momentum,
        reduced=traj,
        states=states,
        M0=M0,
    )
    logger.debug(
        "%s lift: constraint drift %.3e, momentum drift %.3e",
        chart.value, ambient.constraint_drift, ambient.momentum_drift,
    )
    return ambient


def reconstruct_sphere(traj: Trajectory, M0: float | None = None) -> AmbientTrajectory:
    """M = (0, 0, M₀); cos θ = m_z/M₀, φ = atan2(m_x, m_y), ψ by quadrature."""
    if traj.geometry != Geometry.SPHERE:
        raise ValidationError("reconstruct_sphere needs a trajectory on S².")
    M0 = _default_m0(traj, M0)
    _check_leaf(traj, M0, 1)
    for t, s in zip(traj.times, traj.states):
        if not _chart_margin(s.m[2], M0):
            raise ChartBreakdown(t=float(t), message="|m_z| reaches M0")

    def psi_rate(y: np.ndarray) -> np.ndarray:
        omega = _gradient_array(y, traj.masses, traj.geometry, traj.potential)
        denominator = M0 ** 2 - y[2] ** 2
        if denominator <= 0.0:
            raise ChartBreakdown(t=math.nan, message="|m_z| reaches M0")
        return np.array([M0 * (y[0] * omega[0] + y[1] * omega[1]) / denominator])

    times, states, psi = _lift(traj, psi_rate)
    m = np.array([s.m for s in states])
    theta = np.arccos(np.clip(m[:, 2] / M0, -1.0, 1.0))
    phi = np.unwrap(np.arctan2(m[:, 0], m[:, 1]))
    angles = EulerAngles(chart=EulerChart.SPHERE, first=theta, second=phi, third=psi)
    return _ambient(traj, EulerChart.SPHERE, times, states, angles, M0)


def reconstruct_l2_elliptic(traj: Trajectory, M0: float | None = None) -> AmbientTrajectory:
    """M = (0, 0, M₀); cosh θ = m_z/M₀, φ = atan2(−m_x, −m_y), ψ by quadrature."""
    if traj.geometry != Geometry.LOBACHEVSKY:
        raise ValidationError("reconstruct_l2_elliptic needs a trajectory on L².")
    M0 = _default_m0(traj, M0)
    _check_leaf(traj, M0, 1)
    for t, s in zip(traj.times, traj.states):
        if not s.m[2] > 0:
            raise ValidationError(f"Momentum left the upper sheet (m_z <= 0) at t={t!r}.")
        if not s.m[2] > M0 * (1.0 + CHART_MARGIN):
            raise ChartBreakdown(t=float(t), message="m_z reaches M0")

    def psi_rate(y: np.ndarray) -> np.ndarray:
        omega = _gradient_array(y, traj.masses, traj.geometry, traj.potential)
        denominator = M0 ** 2 - y[2] ** 2
        if denominator >= 0.0:
            raise ChartBreakdown(t=math.nan, message="m_z reaches M0")
        return np.array([M0 * (y[0] * omega[0] + y[1] * omega[1]) / denominator])

    times, states, psi = _lift(traj, psi_rate)
    m = np.array([s.m for s in states])
    theta = np.arccosh(np.maximum(m[:, 2] / M0, 1.0))
    phi = np.unwrap(np.arctan2(-m[:, 0] + 0.0, -m[:, 1]))
    angles = EulerAngles(chart=EulerChart.L2_ELLIPTIC, first=theta, second=phi, third=psi)
    return _ambient(traj, EulerChart.L2_ELLIPTIC, times, states, angles, M0)


def reconstruct_l2_hyperbolic(traj: Trajectory, M0: float | None = None) -> AmbientTrajectory:
    """M = (M₀, 0, 0); cos ψ = m_x/M₀, tanh θ = −m_z/m_y, κ by quadrature."""
    if traj.geometry != Geometry.LOBACHEVSKY:
        raise ValidationError("reconstruct_l2_hyperbolic needs a trajectory on L².")
    M0 = _default_m0(traj, M0)
    _check_leaf(traj, M0, -1)
    for t, s in zip(traj.times, traj.states):
        if not _chart_margin(s.m[0], M0):
            raise ChartBreakdown(t=float(t), message="|m_x| reaches M0")

    def kappa_rate(y: np.ndarray) -> np.ndarray:
        omega = _gradient_array(y, traj.masses, traj.geometry, traj.potential)
        denominator = M0 ** 2 - y[0] ** 2
        if denominator <= 0.0:
            raise ChartBreakdown(t=math.nan, message="|m_x| reaches M0")
        return np.array([M0 * (y[1] * omega[1] + y[2] * omega[2]) / denominator])

    times, states, kappa = _lift(traj, kappa_rate)
    m = np.array([s.m for s in states])
    theta = np.arctanh(-m[:, 2] / m[:, 1])
    sin_psi = -m[:, 1] / (M0 * np.cosh(theta))
    psi = np.unwrap(np.arctan2(sin_psi, m[:, 0] / M0))
    psi = psi + 2.0 * math.pi * (psi[0] < 0)
    angles = EulerAngles(chart=EulerChart.L2_HYPERBOLIC, first=kappa, second=psi, third=theta)
    return _ambient(traj, EulerChart.L2_HYPERBOLIC, times, states, angles, M0)


def reconstruct(traj: Trajectory, M0: float | None = None) -> AmbientTrajectory:
    """Dispatches on the geometry and on the sign of the Casimir."""
    if traj.geometry == Geometry.SPHERE:
        return reconstruct_sphere(traj, M0)
    if traj.casimirs[0] > 0:
        return reconstruct_l2_elliptic(traj, M0)
    elif traj.casimirs[0] < 0:
        return reconstruct_l2_hyperbolic(traj, M0)
    raise ValidationError("Reconstruction with parabolic momentum (C = 0) is not supported.")



def _inverse(g: np.ndarray, geometry: Geometry) -> np.ndarray:
    metric = geometry.metric
    return metric @ g.T @ metric


def angular_velocities(ambient: AmbientTrajectory) -> np.ndarray:
    """ω = ∂H/∂m at every sample."""
    reduced = ambient.reduced
    return np.array([
        _gradient_array(s.as_array(), reduced.masses, reduced.geometry, reduced.potential)[:3]
        for s in ambient.states
    ])


def angular_velocity_residual(ambient: AmbientTrajectory) -> float:
    """
    max ‖g⁻¹ġ − ω̂K‖ / max(1, |ω|) over interior samples, ġ by central
    differences. Needs a fine, uniform time grid.
    """
    if len(ambient.times) < 3:
        raise ValidationError("Need at least three samples to differentiate the frames.")
    geometry = ambient.geometry
    omegas = angular_velocities(ambient)
    worst = 0.0
    for ii in range(1, len(ambient.times) - 1):
        g_dot = (ambient.frames[ii + 1] - ambient.frames[ii - 1]) / (ambient.times[ii + 1] - ambient.times[ii - 1])
        xi = _inverse(ambient.frames[ii], geometry) @ g_dot
        target = _hat(omegas[ii]) @ geometry.metric
        worst = max(worst, float(np.max(np.abs(xi - target))) / max(1.0, float(np.linalg.norm(omegas[ii]))))
    return worst


def orbit_commutation_residual(ambient: AmbientTrajectory) -> float:
    """
    For a relative equilibrium g(t) = g(0) exp(tξ), so g(0)⁻¹g(t) and
    g(0)⁻¹g(2t) commute. Assumes uniformly spaced samples.
    """
    geometry = ambient.geometry
    g0_inv = _inverse(ambient.frames[0], geometry)
    worst = 0.0
    for ii in range(1, (len(ambient.times) - 1) // 2 + 1):
        a = g0_inv @ ambient.frames[ii]
        b = g0_inv @ ambient.frames[2 * ii]
        worst = max(worst, float(np.max(np.abs(a @ b - b @ a))))
    return worst


def ambient_energy(ambient: AmbientTrajectory) -> np.ndarray:
    """½Σ μ_a⟨Ṙ_a, Ṙ_a⟩ + U(q) evaluated on the fixed-frame motion."""
    reduced = ambient.reduced
    geometry = ambient.geometry
    metric = geometry.metric
    separations = ambient.separations()
    energies = []
    for g, s, q_ambient in zip(ambient.frames, ambient.states, separations):
        grad = _gradient_array(s.as_array(), reduced.masses, geometry, reduced.potential)
        xi = _hat(grad[:3]) @ metric
        r1, r2 = body_positions(s.q, geometry)
        v1 = g @ (xi @ r1)
        v2 = g @ (xi @ r2 + _body_velocity2(s.q, grad[4], geometry))
        kinetic = 0.5 * (
            reduced.masses.mu1 * float(minkowski(v1, v1, geometry))
            + reduced.masses.mu2 * float(minkowski(v2, v2, geometry))
        )
        energies.append(kinetic + float(reduced.potential.eval_u(q_ambient)))
    return np.array(energies)


def energy_residual(ambient: AmbientTrajectory) -> float:
    source = ambient.reduced
    reduced = np.array([hamiltonian(s, source.masses, source.geometry, source.potential) for s in ambient.states])
    ambient_values = ambient_energy(ambient)
    return float(np.max(np.abs(ambient_values - reduced)) / max(1.0, float(np.max(np.abs(reduced)))))


def re_cyclic_rate(re: RelativeEquilibrium) -> float:
    """Constant rate of ψ (S², elliptic L²) or κ (hyperbolic L²) along an RE."""
    y = re.state.as_array()
    omega = _gradient_array(y, re.masses, re.geometry, re.potential)
    M0 = re.M0
    if re.family == Family.HYPERBOLIC_L2:
        return float(M0 * (y[1] * omega[1] + y[2] * omega[2]) / (M0 ** 2 - y[0] ** 2))
    return float(M0 * (y[0] * omega[0] + y[1] * omega[1]) / (M0 ** 2 - y[2] ** 2))


def re_positions(re: RelativeEquilibrium, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Closed-form fixed-frame positions along an RE, with the cyclic angle
    starting at zero as in the reconstruction.
    """
    times = np.asarray(times, dtype=float)
    angle = re_cyclic_rate(re) * times
    a, b = re.alpha, re.q - re.alpha
    ones = np.ones_like(times)
    if re.geometry == Geometry.SPHERE:
        R1 = np.column_stack([math.sin(a) * np.sin(angle), -math.sin(a) * np.cos(angle), math.cos(a) * ones])
        R2 = np.column_stack([-math.sin(b) * np.sin(angle), math.sin(b) * np.cos(angle), math.cos(b) * ones])
    elif re.family == Family.ELLIPTIC_L2:
        R1 = np.column_stack([-math.sinh(a) * np.sin(angle), math.sinh(a) * np.cos(angle), math.cosh(a) * ones])
        R2 = np.column_stack([math.sinh(b) * np.sin(angle), -math.sinh(b) * np.cos(angle), math.cosh(b) * ones])
    else:
        R1 = np.column_stack([-math.sinh(a) * ones, math.cosh(a) * np.sinh(angle), math.cosh(a) * np.cosh(angle)])
        R2 = np.column_stack([math.sinh(b) * ones, math.cosh(b) * np.sinh(angle), math.cosh(b) * np.cosh(angle)])
    return R1, R2


def reconstruct_re(re: RelativeEquilibrium, times: np.ndarray, tol: float = 1e-10) -> AmbientTrajectory:
    """Integrates from the RE state over ``times`` and lifts the result."""
    times = np.asarray(times, dtype=float)
    traj = integrate(
        s0=re.state,
        t_end=float(times[-1]),
        tol=tol,
        masses=re.masses,
        geometry=re.geometry,
        pot=re.potential,
        t_eval=times,
    )
    if re.family == Family.HYPERBOLIC_L2:
        return reconstruct_l2_hyperbolic(traj, re.M0)
    elif re.family == Family.ELLIPTIC_L2:
        return reconstruct_l2_elliptic(traj, re.M0)
    return reconstruct_sphere(traj, re.M0)
