from curved_two_body.potentials import (
    Potential,
    PotentialEnum,
    gravitational,
    potential,
)
from curved_two_body.reduced_core import Geometry, Masses, ReducedState
from curved_two_body.rel_equilibria import Family, RelativeEquilibrium, enumerate_re, solve_family

__all__ = [
    "Family",
    "Geometry",
    "Masses",
    "Potential",
    "PotentialEnum",
    "ReducedState",
    "RelativeEquilibrium",
    "enumerate_re",
    "gravitational",
    "potential",
    "solve_family",
]
