"""Simons-type identities for spacelike submanifolds of warped products, checked with Taylor jets."""

from .ambient import AmbientConfig, ChartPoint, constant_curvature, riemann_closed_form, riemann_from_chart
from .catalog import get_entry
from .extrinsic import Immersion, analyze, derived_at, extrinsic_at

__all__ = [
    "AmbientConfig",
    "ChartPoint",
    "Immersion",
    "analyze",
    "constant_curvature",
    "derived_at",
    "extrinsic_at",
    "get_entry",
    "riemann_closed_form",
    "riemann_from_chart",
]
