from .base import GroupBackend, Word, IDENTITY
from .free import FreeGroup
from .free_product import FreeProductCyclic
from .lattice import Lattice
from .small_cancellation import SmallCancellationGroup
from .factory import build_group

__all__ = [
    "GroupBackend",
    "Word",
    "IDENTITY",
    "FreeGroup",
    "FreeProductCyclic",
    "Lattice",
    "SmallCancellationGroup",
    "build_group",
]
