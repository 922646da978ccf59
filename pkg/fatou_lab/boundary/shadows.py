"""
Gromov products toward the boundary, shadows V_r and boundary regions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import structlog

from fatou_lab.core.constants import STABILIZATION_MARGIN
from fatou_lab.core.numbers import HalfInt, ZERO
from fatou_lab.core.schemas import TubeVerdict
from fatou_lab.boundary.rays import BoundaryRay
from fatou_lab.geometry.metric import gromov_product
from fatou_lab.groups.base import GroupBackend, Word

logger = structlog.get_logger(__name__)

Point = Union[Word, BoundaryRay]


def stabilization_depth(x: Word, c: HalfInt | int = 0, delta_hat: HalfInt | int = 0, o: Word = (),
                        group: Optional[GroupBackend] = None) -> int:
    """d(o,x) + ceil(c) + 8 delta + 4"""
    d = len(x) if group is None else group.distance(o, x)
    return d + HalfInt.of(c).ceil() + (HalfInt.of(delta_hat) * 8).ceil() + STABILIZATION_MARGIN


def gromov_product_to_ray(x: Word, theta: BoundaryRay, o: Word = (), depth: Optional[int] = None) -> HalfInt:
    """(x, theta)_o read off at ray point `depth`"""
    group = theta.group
    if depth is None:
        depth = stabilization_depth(x, o=o, group=group)
    return gromov_product(x, theta.point(depth), o, group)


def ray_gromov_product(theta: BoundaryRay, xi: BoundaryRay, o: Word = (), depth: int = 32) -> HalfInt:
    group = theta.group
    return gromov_product(theta.point(depth), xi.point(depth), o, group)


def _product(a: Point, b: Point, o: Word, group: GroupBackend, depth: Optional[int]) -> tuple[HalfInt, bool]:
    """Gromov product of points or rays; the flag tells whether a ray was involved"""
    if isinstance(a, BoundaryRay) and isinstance(b, BoundaryRay):
        return ray_gromov_product(a, b, o, depth or 32), True
    if isinstance(a, BoundaryRay):
        a, b = b, a
    if isinstance(b, BoundaryRay):
        return gromov_product_to_ray(a, b, o, depth), True
    return gromov_product(a, b, o, group), False


@dataclass(frozen=True)
class Shadow:
    """V_r(base) = {y : (base, y)_o >= r}"""
    base: Point
    r: HalfInt

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", HalfInt.of(self.r))
        if self.r < 0:
            raise ValueError("shadow threshold must be >= 0")

    def label(self, group: GroupBackend) -> str:
        base = self.base.description if isinstance(self.base, BoundaryRay) else group.format_word(self.base)
        return f"V[{base},{self.r}]"


def cylinder(w: Word | str, group: GroupBackend) -> Shadow:
    """V_|w|(w); on trees, the ends extending w"""
    if isinstance(w, str):
        w = group.word(w)
    return Shadow(base=w, r=HalfInt.of(len(w)))


def shadow_verdict(s: Shadow, y: Point, group: GroupBackend, o: Word = (),
                   delta_hat: HalfInt | int = 0, depth: Optional[int] = None) -> TubeVerdict:
    if s.r == ZERO:
        return TubeVerdict.IN
    value, approximate = _product(s.base, y, o, group, depth)
    slack = HalfInt.of(delta_hat) * 2 if approximate else ZERO
    if value >= s.r + slack:
        return TubeVerdict.IN
    if value < s.r - slack:
        return TubeVerdict.OUT
    return TubeVerdict.UNCERTAIN


def shadow_contains(s: Shadow, y: Point, group: GroupBackend, o: Word = (),
                    delta_hat: HalfInt | int = 0, depth: Optional[int] = None) -> bool:
    """Membership with the uncertain band resolved to False"""
    verdict = shadow_verdict(s, y, group, o, delta_hat, depth)
    if verdict == TubeVerdict.UNCERTAIN:
        logger.debug("Shadow membership uncertain, treated as outside", shadow=s.label(group))
    return verdict == TubeVerdict.IN


@dataclass(frozen=True)
class BoundaryRegion:
    """A finite union of shadows; the empty union is the empty set"""
    shadows: tuple[Shadow, ...]

    @classmethod
    def of(cls, shadows: Sequence[Shadow]) -> BoundaryRegion:
        return cls(tuple(shadows))

    @classmethod
    def full(cls) -> BoundaryRegion:
        return cls((Shadow(base=(), r=ZERO),))

    @classmethod
    def empty(cls) -> BoundaryRegion:
        return cls(())

    @classmethod
    def cylinders(cls, words: Sequence[Word | str], group: GroupBackend) -> BoundaryRegion:
        return cls(tuple(cylinder(w, group) for w in words))

    @property
    def is_full(self) -> bool:
        return any(s.r == ZERO for s in self.shadows)

    def label(self, group: GroupBackend) -> str:
        if not self.shadows:
            return "empty"
        return "+".join(s.label(group) for s in self.shadows)

    def verdict(self, y: Point, group: GroupBackend, o: Word = (), delta_hat: HalfInt | int = 0,
                depth: Optional[int] = None) -> TubeVerdict:
        verdicts = [shadow_verdict(s, y, group, o, delta_hat, depth) for s in self.shadows]
        if TubeVerdict.IN in verdicts:
            return TubeVerdict.IN
        if TubeVerdict.UNCERTAIN in verdicts:
            return TubeVerdict.UNCERTAIN
        return TubeVerdict.OUT

    def contains(self, y: Point, group: GroupBackend, o: Word = (), delta_hat: HalfInt | int = 0,
                 depth: Optional[int] = None) -> bool:
        return self.verdict(y, group, o, delta_hat, depth) == TubeVerdict.IN

    def tree_cylinders(self) -> List[Word]:
        """The cylinder words of this region on a tree, reduced to an antichain"""
        words: List[Word] = []
        for s in self.shadows:
            if isinstance(s.base, BoundaryRay):
                depth = s.r.ceil()
                words.append(s.base.point(depth))
            else:
                if s.r > len(s.base):
                    continue
                words.append(s.base[: s.r.ceil()])
        words.sort(key=len)
        antichain: List[Word] = []
        for w in words:
            if not any(w[: len(a)] == a for a in antichain):
                antichain.append(w)
        return antichain
