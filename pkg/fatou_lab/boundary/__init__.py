from .rays import BoundaryRay, RayKind, periodic_ray, frozen_ray, translate_ray
from .shadows import (
    Shadow,
    BoundaryRegion,
    cylinder,
    gromov_product_to_ray,
    ray_gromov_product,
    shadow_contains,
    shadow_verdict,
    stabilization_depth,
)
from .tubes import (
    TubeSpec,
    TubeClassification,
    in_tube,
    tube_points,
    spike,
    region_tube_verdict,
)

__all__ = [
    "BoundaryRay",
    "RayKind",
    "periodic_ray",
    "frozen_ray",
    "translate_ray",
    "Shadow",
    "BoundaryRegion",
    "cylinder",
    "gromov_product_to_ray",
    "ray_gromov_product",
    "shadow_contains",
    "shadow_verdict",
    "stabilization_depth",
    "TubeSpec",
    "TubeClassification",
    "in_tube",
    "tube_points",
    "spike",
    "region_tube_verdict",
]
