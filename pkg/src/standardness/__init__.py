"""Estimation of the standardness constant of a probability measure from a sample."""

from .geometry import (
    UNKNOWN,
    Ball,
    ConvexPolygon,
    ShapeError,
    analytic_upsilon,
    area,
    ball_shape_intersection,
    contains,
    make_regular_polygon,
    min_interior_angle,
    unit_ball_volume,
    unit_square,
)
from .estimator import (
    EstimateResult,
    GridIndex,
    SampleCloud,
    bias_corrected_estimate,
    default_radius,
    neighbor_counts,
    plugin_estimate,
)
from .sampling import RadialCombination, SeedSpec, UniformOnShape, nu_ball, sample, support

__version__ = "0.1.0"
