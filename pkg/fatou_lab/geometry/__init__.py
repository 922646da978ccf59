from .metric import (
    Ball,
    GeodesicSegment,
    ball,
    distance,
    geodesic,
    gromov_product,
    distance_matrix,
    thinness,
)
from .delta import estimate_delta

__all__ = [
    "Ball",
    "GeodesicSegment",
    "ball",
    "distance",
    "geodesic",
    "gromov_product",
    "distance_matrix",
    "thinness",
    "estimate_delta",
]
