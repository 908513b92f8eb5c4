from curved_two_body.potentials.gravitational import (
    GravitationalPotential,
    Potential,
    PotentialEnum,
    attractivity_grid,
    gravitational,
    potential,
)
from curved_two_body.potentials.custom import CustomPotential, custom
from curved_two_body.potentials.tabulated import TabulatedPotential, tabulated

__all__ = [
    "CustomPotential",
    "GravitationalPotential",
    "Potential",
    "PotentialEnum",
    "TabulatedPotential",
    "attractivity_grid",
    "custom",
    "gravitational",
    "potential",
    "tabulated",
]
