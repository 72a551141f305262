"""Numerical laboratory for Gaussian correlation inequalities on symmetric convex bodies."""

__version__ = "0.1.0"

from .bodies import (  # noqa: E402
    AxisBox, Ball, Body, Ellipsoid, Intersection, MinkowskiSum, OrthogonalMatrix, Scaled, Slab, SymPolytope,
    body_from_json, bounding_radius, contains, intersect, minkowski_contains, rotate, scale, support,
)
from .measure import Estimate, GaussianSpec, RadialMeasure  # noqa: E402
from .randomness import Stream, derive_stream  # noqa: E402
