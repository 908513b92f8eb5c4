"""
Command-line surface: ``curved-two-body <subcommand> [options]``.

JSON records go to stdout one per line; CSV and SVG files go to ``--out``
(default ``<data path>/<subcommand>``). Exit codes: 0 on success (including
queries without a relative equilibrium), 2 on validation errors, 3 on
numerical failures.
"""
import argparse
import logging
import math
from multiprocessing import Pool
from pathlib import Path
import sys
from typing import Any, Callable, Sequence

import numpy as np

from curved_two_body.config import (
    DEFAULT_LOG_LEVEL,
    RunConfig,
    check_log_level,
    default_log_level,
    load_run_config,
)
from curved_two_body.diagrams import (
    BRANCH_MARGIN,
    L2_Q_MAX,
    admissible_scatter,
    em_diagram,
    em_svg,
    polylines_svg,
    region_svg,
    save_branches,
    save_polylines,
    stability_region,
)
from curved_two_body.errors import NoSolution, NumericalError, ValidationError
from curved_two_body.integrator import TRAJECTORY_HEADER, integrate
from curved_two_body.normal_form import fig10_curves, kam_analysis
from curved_two_body.paths import load_output_dir
from curved_two_body.reconstruction import (
    angular_velocity_residual,
    energy_residual,
    reconstruct,
    reconstruct_re,
)
from curved_two_body.reduced_core import Geometry, Masses, ReducedState
from curved_two_body.rel_equilibria import Family, RelativeEquilibrium, enumerate_re, solve_family
from curved_two_body.serializer import json_line, write_csv, write_rows
from curved_two_body.stability import classify

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"
REGION_MU_RANGE = (1e-2, 1e2)
FIG10_MU_RANGE = (0.05, 1.0)
SWEEP_HEADER = (
    "mu", "q", "family", "n_plus", "n_minus", "n_zero", "verdict", "a", "b", "f", "R1", "R2", "R3",
)


def _emit(record: dict[str, Any]) -> None:
    sys.stdout.write(json_line(record) + "\n")


def _out_dir(config: RunConfig, command: str) -> Path:
    if config.out is None:
        return load_output_dir(command)
    config.out.mkdir(parents=True, exist_ok=True)
    return config.out


def _grid(config: RunConfig, default: tuple[float, float], points: int | None = None, log: bool = False) -> np.ndarray:
    start = default[0] if config.grid_start is None else config.grid_start
    stop = default[1] if config.grid_stop is None else config.grid_stop
    points = config.grid_points if points is None else points
    if log:
        if not 0 < start < stop:
            raise ValidationError(f"Logarithmic grid needs 0 < start < stop, got ({start}, {stop}).")
        return np.logspace(math.log10(start), math.log10(stop), points)
    return np.linspace(start, stop, points)


def _q_range(geometry: Geometry) -> tuple[float, float]:
    if geometry == Geometry.SPHERE:
        return BRANCH_MARGIN, math.pi - BRANCH_MARGIN
    return BRANCH_MARGIN, L2_Q_MAX


def _initial_state(config: RunConfig) -> ReducedState:
    return ReducedState(m=np.array([config.m_x, config.m_y, config.m_z]), q=config.q, p=config.p)


def relative_equilibria(config: RunConfig) -> list[RelativeEquilibrium]:
    """Every RE at ``config.q``, or the one of ``config.family`` at its natural parameter."""
    masses, pot = config.masses, config.build_potential()
    if config.family is None:
        return enumerate_re(config.q, masses, pot, config.geometry)
    family = Family(config.family)
    if family.geometry != config.geometry:
        raise ValidationError(f"Family {family.value} does not live on {config.geometry.value}.")
    if family == Family.RIGHT_ANGLED:
        if config.theta is None:
            raise ValidationError("The right-angled family needs --theta.")
        return [solve_family(family, config.theta, masses, pot)]
    return [solve_family(family, config.q, masses, pot)]


def run_simulate(config: RunConfig) -> None:
    traj = integrate(
        s0=_initial_state(config),
        t_end=config.t_end,
        tol=config.tol,
        masses=config.masses,
        geometry=config.geometry,
        pot=config.build_potential(),
        n_samples=config.n_samples,
    )
    if config.out is None:
        write_rows(traj.rows(), TRAJECTORY_HEADER, sys.stdout)
        return
    path = traj.to_csv(_out_dir(config, "simulate") / "trajectory.csv")
    _emit({
        "path": str(path),
        "samples": len(traj),
        "energy_drift": traj.energy_drift,
        "casimir_drift": traj.casimir_drift,
    })


def run_find_re(config: RunConfig) -> None:
    for re in relative_equilibria(config):
        _emit(re.as_record())


def run_stability(config: RunConfig) -> None:
    for re in relative_equilibria(config):
        _emit({"geometry": re.geometry.value, **classify(re).as_record()})


def run_kam(config: RunConfig) -> None:
    for re in relative_equilibria(config):
        _emit({"geometry": re.geometry.value, **kam_analysis(re).as_record()})


def _sweep_point(args: tuple[float, Masses, Geometry, RunConfig]) -> list[list[Any]]:
    q, masses, geometry, config = args
    try:
        equilibria = enumerate_re(q, masses, config.build_potential(), geometry)
    except NoSolution as e:
        logger.debug("sweep: q=%g skipped: %s", q, e)
        return []
    rows = []
    for re in equilibria:
        report = classify(re)
        rows.append([
            masses.mu, re.q, re.family.value, *report.signature, report.verdict.value,
            report.char_a, report.char_b, report.f_indicator, report.R1, report.R2, report.R3,
        ])
    return rows


def run_sweep(config: RunConfig) -> None:
    q_grid = _grid(config, _q_range(config.geometry))
    tasks = [(float(q), config.masses, config.geometry, config) for q in q_grid]
    if config.jobs > 1:
        with Pool(processes=config.jobs) as pool:
            chunks = pool.map(_sweep_point, tasks)
    else:
        chunks = [_sweep_point(task) for task in tasks]
    rows = [row for chunk in chunks for row in chunk]
    logger.info("sweep: %d RE over %d separations", len(rows), len(q_grid))
    path = write_csv(rows=rows, header=SWEEP_HEADER, path=_out_dir(config, "sweep") / "sweep.csv")
    _emit({"path": str(path), "rows": len(rows)})


def run_diagram(config: RunConfig) -> None:
    out = _out_dir(config, "diagram")
    pot = config.build_potential()
    mu = config.mass_ratio
    branches = em_diagram(config.geometry, mu, pot=pot, sampling=config.grid_points, jobs=config.jobs)
    masses = Masses.from_ratio(mu)
    region = stability_region(_grid(config, REGION_MU_RANGE, log=True), config.geometry)
    written = {
        "branches": save_branches(branches, out / "branches.csv"),
        "region": write_csv(rows=region.tolist(), header=("mu", "alpha_star", "q_star"), path=out / "region.csv"),
    }
    scatter = None
    if config.scatter > 0:
        scatter = admissible_scatter(config.geometry, masses, pot, n_samples=config.scatter, seed=config.seed)
        written["scatter"] = write_csv(rows=scatter.tolist(), header=("C", "H"), path=out / "scatter.csv")
    if config.svg:
        written["em_svg"] = em_svg(branches, out / "energy_momentum.svg", masses, pot, scatter=scatter)
        written["region_svg"] = region_svg(region, out / "region.svg", config.geometry)
    _emit({
        "geometry": config.geometry.value,
        "mu": mu,
        "singular": {branch.family.value: branch.singular for branch in branches},
        **{key: str(path) for key, path in written.items()},
    })


def run_fig10(config: RunConfig) -> None:
    if config.geometry != Geometry.SPHERE:
        raise ValidationError("The resonance map is defined for acute RE on s2.")
    out = _out_dir(config, "fig10")
    mu_grid = _grid(config, FIG10_MU_RANGE)
    half = 0.5 * math.pi
    alpha_grid = np.linspace(BRANCH_MARGIN, half - BRANCH_MARGIN, config.alpha_points or config.grid_points)
    result = fig10_curves(mu_grid, alpha_grid, jobs=config.jobs)
    written = {
        name: save_polylines({name: segments}, out / f"fig10_{name}.csv", columns=("mu", "alpha"))
        for name, segments in result.contours.items()
    }
    if config.svg:
        written["svg"] = polylines_svg(result.contours, out / "fig10.svg", labels=("mu", "alpha"))
    _emit({key: str(path) for key, path in written.items()})


def run_reconstruct(config: RunConfig) -> None:
    if config.family is not None:
        re = relative_equilibria(config)[0]
        times = np.linspace(0.0, config.t_end, config.n_samples) if config.t_end != 0 else np.array([0.0])
        ambient = reconstruct_re(re, times, tol=config.tol)
    else:
        traj = integrate(
            s0=_initial_state(config),
            t_end=config.t_end,
            tol=config.tol,
            masses=config.masses,
            geometry=config.geometry,
            pot=config.build_potential(),
            n_samples=config.n_samples,
        )
        ambient = reconstruct(traj)
    out = _out_dir(config, "reconstruct")
    record: dict[str, Any] = {
        "chart": ambient.chart.value,
        "path": str(ambient.to_csv(out / "ambient.csv")),
        "constraint_drift": ambient.constraint_drift,
        "momentum_drift": ambient.momentum_drift,
        "group_drift": ambient.group_drift,
        "energy_residual": energy_residual(ambient),
    }
    if len(ambient.times) >= 3:
        record["angular_velocity_residual"] = angular_velocity_residual(ambient)
    if config.svg:
        record["svg"] = str(ambient.to_svg(out / "ambient.svg"))
    _emit(record)


COMMANDS: dict[str, Callable[[RunConfig], None]] = {
    "simulate": run_simulate,
    "find-re": run_find_re,
    "stability": run_stability,
    "kam": run_kam,
    "sweep": run_sweep,
    "diagram": run_diagram,
    "fig10": run_fig10,
    "reconstruct": run_reconstruct,
}


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", type=Path, default=None, help="flat key = value run configuration")
    parser.add_argument("--geometry", choices=[g.value for g in Geometry], default=None)
    parser.add_argument("--mu", type=float, default=None, help="mass ratio mu1/mu2, normalised to mu1 = 1")
    parser.add_argument("--mu1", type=float, default=None)
    parser.add_argument("--mu2", type=float, default=None)
    parser.add_argument("--potential", choices=["gravitational", "tabulated"], default=None)
    parser.add_argument("--k", type=float, default=None, help="coupling constant G*mu1*mu2")
    parser.add_argument("--table", type=Path, default=None, help="CSV table q, U, dU")
    parser.add_argument("-j", "--jobs", type=int, default=None, help="worker processes")
    parser.add_argument("-o", "--out", type=Path, default=None, help="output directory")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--svg", action="store_true", default=None, help="also write SVG figures")
    return parser


def _state_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--m-x", dest="m_x", type=float, default=None)
    parser.add_argument("--m-y", dest="m_y", type=float, default=None)
    parser.add_argument("--m-z", dest="m_z", type=float, default=None)
    parser.add_argument("--q", type=float, default=None)
    parser.add_argument("--p", type=float, default=None)
    parser.add_argument("--t-end", dest="t_end", type=float, default=None)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("-n", "--n-samples", dest="n_samples", type=int, default=None)


def _re_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--q", type=float, default=None, help="separation")
    parser.add_argument("--family", choices=[f.value for f in Family], default=None)
    parser.add_argument("--theta", type=float, default=None, help="angle of the right-angled family")


def _grid_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid-start", dest="grid_start", type=float, default=None)
    parser.add_argument("--grid-stop", dest="grid_stop", type=float, default=None)
    parser.add_argument("--grid-points", dest="grid_points", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="curved-two-body",
        description="Reduced two-body problem on the sphere and the Lobachevsky plane",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    simulate = subparsers.add_parser("simulate", parents=[common], help="integrate the reduced equations")
    _state_arguments(simulate)

    for name, text in (
        ("find-re", "relative equilibria at a separation"),
        ("stability", "linear stability of the relative equilibria"),
        ("kam", "Birkhoff normal form and KAM verdict"),
    ):
        _re_arguments(subparsers.add_parser(name, parents=[common], help=text))

    sweep = subparsers.add_parser("sweep", parents=[common], help="stability along a grid of separations")
    _grid_arguments(sweep)

    diagram = subparsers.add_parser("diagram", parents=[common], help="energy-momentum diagram and stable region")
    _grid_arguments(diagram)
    diagram.add_argument("--scatter", type=int, default=None, help="Monte-Carlo (C, H) samples")
    diagram.add_argument("--seed", type=int, default=None)

    fig10 = subparsers.add_parser("fig10", parents=[common], help="resonance and Arnold-determinant curves")
    _grid_arguments(fig10)
    fig10.add_argument("--alpha-points", dest="alpha_points", type=int, default=None)

    reconstruct_parser = subparsers.add_parser("reconstruct", parents=[common], help="lift to the fixed frame")
    _state_arguments(reconstruct_parser)
    reconstruct_parser.add_argument("--family", choices=[f.value for f in Family], default=None)
    reconstruct_parser.add_argument("--theta", type=float, default=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {key: value for key, value in vars(args).items() if key not in ("command", "config")}
    try:
        logging.basicConfig(
            level=check_log_level(args.log_level or default_log_level()),
            format=LOG_FORMAT,
            stream=sys.stderr,
        )
        config = load_run_config(args.config, overrides)
        if args.log_level is None and config.log_level != DEFAULT_LOG_LEVEL:
            logging.getLogger().setLevel(config.log_level.upper())
        logger.info("%s with %s", args.command, config)
        COMMANDS[args.command](config)
    except NoSolution as e:
        _emit({"no_solution": str(e)})
    except ValueError as e:
        # ValidationError is a ValueError; so are unknown enum values.
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
