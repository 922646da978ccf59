from typing import Optional, Union

from fatou_lab.config import settings
from fatou_lab.core.schemas import GroupKind, GroupSpec
from fatou_lab.groups.base import GroupBackend
from fatou_lab.groups.free import FreeGroup
from fatou_lab.groups.free_product import FreeProductCyclic
from fatou_lab.groups.lattice import Lattice
from fatou_lab.groups.small_cancellation import SmallCancellationGroup


def build_group(spec: Union[GroupSpec, str], element_budget: Optional[int] = None) -> GroupBackend:
    """Initialize the backend for a presentation"""
    if isinstance(spec, str):
        spec = GroupSpec.parse(spec)
    if spec.kind == GroupKind.FREE:
        return FreeGroup(spec)
    if spec.kind == GroupKind.FREE_PRODUCT_CYCLIC:
        return FreeProductCyclic(spec)
    if spec.kind == GroupKind.SMALL_CANCELLATION:
        return SmallCancellationGroup(spec, element_budget or settings.ball_element_budget)
    if spec.kind == GroupKind.LATTICE:
        return Lattice(spec)
    raise ValueError(f"Unsupported group kind: {spec.kind}")
