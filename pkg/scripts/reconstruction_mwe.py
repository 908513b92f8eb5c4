from pathlib import Path

import numpy as np

from curved_two_body.potentials import gravitational
from curved_two_body.reconstruction import (
    angular_velocity_residual,
    re_positions,
    reconstruct_re,
)
from curved_two_body.reduced_core import Geometry, Masses
from curved_two_body.rel_equilibria import solve_l2_elliptic, solve_l2_hyperbolic


def main():
    output_folder = Path(__file__).resolve().parents[1] / "data"
    output_folder.mkdir(parents=False, exist_ok=True)

    masses = Masses.from_ratio(0.5)
    pot = gravitational(Geometry.LOBACHEVSKY)
    times = np.linspace(0.0, 5.0, 201)
    for solver in (solve_l2_elliptic, solve_l2_hyperbolic):
        re = solver(1.0, masses, pot)
        ambient = reconstruct_re(re, times)
        R1, R2 = re_positions(re, times)
        error = max(np.max(np.abs(ambient.R1 - R1)), np.max(np.abs(ambient.R2 - R2)))
        print(f"{re.family.value}: chart={ambient.chart.value}")
        print(f"  max deviation from the closed form: {error:.3e}")
        print(f"  group consistency residual: {angular_velocity_residual(ambient):.3e}")
        print(f"  |g^T K g - K|: {ambient.group_drift:.3e}")
        ambient.to_svg(output_folder / f"{re.family.value}.svg")


if __name__ == "__main__":
    main()
