import argparse
import math

import numpy as np

from curved_two_body.normal_form import kam_analysis
from curved_two_body.potentials import gravitational
from curved_two_body.reduced_core import Geometry, Masses
from curved_two_body.rel_equilibria import enumerate_re
from curved_two_body.stability import classify, critical_angle


def main_run(mu: float = 0.5, n_points: int = 9):
    # elliptic L2 RE below q* are stable, above it they are not
    alpha_star, q_star = critical_angle(mu, Geometry.LOBACHEVSKY)
    print(f"L2, mu={mu}: alpha*={alpha_star:.10f}, q*={q_star:.10f}")
    masses = Masses.from_ratio(mu)
    pot = gravitational(Geometry.LOBACHEVSKY)
    for q in np.linspace(0.25 * q_star, 2.0 * q_star, n_points):
        for re in enumerate_re(q, masses, pot, Geometry.LOBACHEVSKY):
            report = classify(re)
            print(f"  {re.family.value:14s} q={q:.4f} signature={report.signature} {report.verdict.value}")

    sphere_pot = gravitational(Geometry.SPHERE)
    for q in (0.3, 0.6, 0.9, 1.2):
        re = enumerate_re(q, masses, sphere_pot, Geometry.SPHERE)[0]
        try:
            result = kam_analysis(re)
        except ArithmeticError as e:
            print(f"S2 q={q}: {e}")
            continue
        nf = result.normal_form
        print(
            f"S2 q={q}: omega=({nf.omega1:.6f}, {nf.omega2:.6f}) "
            f"D={nf.arnold_d:.6e} -> {result.verdict.value}"
        )
    print(f"q*(mu=1) on L2 = {critical_angle(1.0, Geometry.LOBACHEVSKY)[1]:.12f} "
          f"(2 asinh(1/sqrt 2) = {2 * math.asinh(1 / math.sqrt(2)):.12f})")


def main():
    parser = argparse.ArgumentParser(description="Stability of relative equilibria")
    parser.add_argument(
        "-m",
        "--mu",
        type=float,
        default=0.5,
        help="Mass ratio mu1/mu2",
    )
    args = parser.parse_args()
    main_run(mu=args.mu)


if __name__ == "__main__":
    main()
