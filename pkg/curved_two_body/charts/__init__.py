from curved_two_body.charts.andoyer import (
    ChartEnum,
    LeafChart,
    SphereAndoyerChart,
    chart,
)
from curved_two_body.charts.lobachevsky import L2EllipticChart, L2HyperbolicChart

__all__ = [
    "ChartEnum",
    "L2EllipticChart",
    "L2HyperbolicChart",
    "LeafChart",
    "SphereAndoyerChart",
    "chart",
]
