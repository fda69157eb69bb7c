"""Coarse description of Teichmueller geodesics on flat tori and slit-torus surfaces."""

__version__ = "0.1.0"

from .curves import (  # noqa: E402
    INF,
    ZERO,
    Slope,
    annular_projection_distance,
    dehn_twist,
    farey_distance,
    farey_geodesic,
    intersection,
    normalize_to_infinity,
    twist_of,
)
from .flat import (  # noqa: E402
    CurveEvolution,
    FlatTorus,
    SlitSurface,
    balance_data,
    build_counterexample_pair,
    flat_length,
    flow,
    systole,
)

__all__ = [
    "__version__", "INF", "ZERO", "Slope", "annular_projection_distance", "dehn_twist",
    "farey_distance", "farey_geodesic", "intersection", "normalize_to_infinity", "twist_of",
    "CurveEvolution", "FlatTorus", "SlitSurface", "balance_data", "build_counterexample_pair",
    "flat_length", "flow", "systole",
]
