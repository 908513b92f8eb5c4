"""
Run configuration: a flat ``key = value`` file read with python-dotenv, with
command-line overrides applied on top.
"""
from dataclasses import dataclass, fields
import logging
import os
from pathlib import Path
from typing import Any, Mapping

import dotenv

from curved_two_body.errors import ConfigError
from curved_two_body.potentials import Potential, PotentialEnum, gravitational, tabulated
from curved_two_body.reduced_core import Geometry, Masses

logger = logging.getLogger(__name__)

LOG_LEVEL_VARIABLE = "CURVED_TWO_BODY_LOG_LEVEL"
DEFAULT_GEOMETRY = Geometry.SPHERE
DEFAULT_MU = 1.0
DEFAULT_K = 1.0
DEFAULT_Q = 1.0
DEFAULT_T_END = 10.0
DEFAULT_TOL = 1e-10
DEFAULT_SAMPLES = 1001
DEFAULT_GRID_POINTS = 200
DEFAULT_JOBS = 1
DEFAULT_SEED = 0
DEFAULT_SCATTER = 0
DEFAULT_LOG_LEVEL = "WARNING"


@dataclass
class RunConfig:
    geometry: Geometry = DEFAULT_GEOMETRY
    mu: float | None = None
    mu1: float | None = None
    mu2: float | None = None
    potential: PotentialEnum = PotentialEnum.GRAVITATIONAL
    k: float = DEFAULT_K
    table: Path | None = None
    family: str | None = None
    q: float = DEFAULT_Q
    theta: float | None = None
    m_x: float = 0.0
    m_y: float = 0.0
    m_z: float = 1.0
    p: float = 0.0
    t_end: float = DEFAULT_T_END
    tol: float = DEFAULT_TOL
    n_samples: int = DEFAULT_SAMPLES
    grid_start: float | None = None
    grid_stop: float | None = None
    grid_points: int = DEFAULT_GRID_POINTS
    alpha_points: int | None = None
    jobs: int = DEFAULT_JOBS
    out: Path | None = None
    seed: int = DEFAULT_SEED
    scatter: int = DEFAULT_SCATTER
    svg: bool = False
    log_level: str = DEFAULT_LOG_LEVEL

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.mu is not None and self.mu1 is not None:
            raise ConfigError("Give either mu or (mu1, mu2), not both.")
        if (self.mu1 is None) != (self.mu2 is None):
            raise ConfigError("mu1 and mu2 must be given together.")
        if self.mu is not None and not self.mu > 0:
            raise ConfigError(f"Mass ratio mu={self.mu!r} must be positive.")
        if self.potential == PotentialEnum.TABULATED and self.table is None:
            raise ConfigError("A tabulated potential needs a table path.")
        if self.potential == PotentialEnum.CUSTOM:
            raise ConfigError("Custom potentials are only available from Python.")
        if not self.jobs >= 1:
            raise ConfigError(f"jobs={self.jobs!r} must be at least 1.")
        if not self.n_samples >= 1:
            raise ConfigError(f"n_samples={self.n_samples!r} must be at least 1.")
        if self.grid_points < 2:
            raise ConfigError(f"grid_points={self.grid_points!r} must be at least 2.")
        check_log_level(self.log_level)

    @property
    def masses(self) -> Masses:
        if self.mu1 is not None:
            return Masses(mu1=self.mu1, mu2=self.mu2)
        return Masses.from_ratio(DEFAULT_MU if self.mu is None else self.mu)

    @property
    def mass_ratio(self) -> float:
        return self.masses.mu

    def build_potential(self) -> Potential:
        if self.potential == PotentialEnum.TABULATED:
            return tabulated(path=self.table, geometry=self.geometry)
        return gravitational(geometry=self.geometry, k=self.k)


_FIELD_TYPES = {
    "geometry": Geometry,
    "mu": float,
    "mu1": float,
    "mu2": float,
    "potential": PotentialEnum,
    "k": float,
    "table": Path,
    "family": str,
    "q": float,
    "theta": float,
    "m_x": float,
    "m_y": float,
    "m_z": float,
    "p": float,
    "t_end": float,
    "tol": float,
    "n_samples": int,
    "grid_start": float,
    "grid_stop": float,
    "grid_points": int,
    "alpha_points": int,
    "jobs": int,
    "out": Path,
    "seed": int,
    "scatter": int,
    "svg": bool,
    "log_level": str,
}


def _coerce(key: str, value: Any) -> Any:
    if value is None or not isinstance(value, str):
        return value
    kind = _FIELD_TYPES[key]
    text = value.strip()
    try:
        if kind is bool:
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind in (float, int) and text.lower() in ("", "none"):
            return None
        return kind(text)
    except ValueError as e:
        raise ConfigError(f"Value {value!r} for {key} not valid: {e}") from e


def load_run_config(
    path: Path | str | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunConfig:
    """Reads ``path`` (optional), then applies the non-``None`` overrides."""
    values: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Configuration file {path} not found.")
        for key, value in dotenv.dotenv_values(path).items():
            key = key.strip().lower().replace("-", "_")
            if key not in _FIELD_TYPES:
                raise ConfigError(f"Configuration key {key} not known.")
            values[key] = _coerce(key, value)
        logger.debug("Loaded %d keys from %s", len(values), path)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"Configuration key {key} not known.")
        values[key] = _coerce(key, value)
    names = {f.name for f in fields(RunConfig)}
    try:
        return RunConfig(**{key: value for key, value in values.items() if key in names})
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from e


def check_log_level(level: str) -> str:
    if not isinstance(logging.getLevelName(str(level).upper()), int):
        raise ConfigError(f"Log level {level!r} not known.")
    return str(level).upper()


def default_log_level() -> str:
    dotenv.load_dotenv()
    return os.getenv(LOG_LEVEL_VARIABLE, DEFAULT_LOG_LEVEL)

