"""
Non-tangential tubes around boundary rays, their spikes, and tubes around
boundary regions.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Set, TextIO, Union

import structlog

from fatou_lab.core.constants import TUBE_CSV_HEADER
from fatou_lab.core.numbers import HalfInt, ZERO
from fatou_lab.core.schemas import TubeVerdict
from fatou_lab.boundary.rays import BoundaryRay
from fatou_lab.boundary.shadows import BoundaryRegion, stabilization_depth
from fatou_lab.geometry.metric import Ball, ball, gromov_product
from fatou_lab.groups.base import GroupBackend, Word

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class TubeSpec:
    theta: BoundaryRay
    c: HalfInt

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", HalfInt.of(self.c))
        if self.c <= 0:
            raise ValueError("tube radius must be > 0")


@dataclass
class TubeClassification:
    inside: Set[Word] = field(default_factory=set)
    uncertain: Set[Word] = field(default_factory=set)

    def dump_csv(self, out: TextIO, group: GroupBackend, o: Word = ()) -> None:
        writer = csv.writer(out)
        writer.writerow(TUBE_CSV_HEADER)
        rows = [(x, TubeVerdict.IN) for x in self.inside] + [(x, TubeVerdict.UNCERTAIN) for x in self.uncertain]
        for x, verdict in sorted(rows, key=lambda r: (len(r[0]), r[0])):
            writer.writerow([group.format_word(x), group.distance(o, x), verdict.value])


def in_tube(x: Word, tube: TubeSpec, o: Word = (), delta_hat: HalfInt | int = 0,
            depth: Optional[int] = None) -> TubeVerdict:
    """
    Classify x against the tube from (o, theta)_x, which pins d(x, ray)
    to within 2 delta.
    """
    group = tube.theta.group
    group.require_boundary("in_tube")
    delta_hat = HalfInt.of(delta_hat)
    if depth is None:
        depth = stabilization_depth(x, tube.c, delta_hat, o, group)
    value = gromov_product(o, tube.theta.point(depth), x, group)
    slack = delta_hat * 2
    if value < tube.c - slack:
        return TubeVerdict.IN
    if value >= tube.c + slack:
        return TubeVerdict.OUT
    return TubeVerdict.UNCERTAIN


def _candidate_radius(c: HalfInt, delta_hat: HalfInt) -> int:
    # (o,theta)_x < c + 2 delta forces d(x, ray) < c + 4 delta
    return (c + delta_hat * 4).ceil()


def tube_points(tube: TubeSpec, region: Union[Ball, int], o: Word = (),
                delta_hat: HalfInt | int = 0) -> TubeClassification:
    """
    Tube points within a ball, found by growing neighbourhoods of the ray
    rather than scanning the ball.
    """
    group = tube.theta.group
    group.require_boundary("tube_points")
    delta_hat = HalfInt.of(delta_hat)
    radius = region.radius if isinstance(region, Ball) else region
    local = ball(group, _candidate_radius(tube.c, delta_hat)).order
    candidates: Set[Word] = set()
    for n in range(radius + len(local[-1]) + 1):
        p = tube.theta.point(n)
        for w in local:
            x = group.multiply(p, w)
            if group.distance(o, x) <= radius:
                candidates.add(x)
    if isinstance(region, Ball):
        candidates &= set(region.elements)
    result = TubeClassification()
    for x in candidates:
        verdict = in_tube(x, tube, o, delta_hat)
        if verdict == TubeVerdict.IN:
            result.inside.add(x)
        elif verdict == TubeVerdict.UNCERTAIN:
            result.uncertain.add(x)
    logger.debug("Tube classified", theta=tube.theta.description, c=str(tube.c), radius=radius,
                 inside=len(result.inside), uncertain=len(result.uncertain))
    return result


def spike(points: Iterable[Word], radius: int, group: GroupBackend, o: Word = ()) -> Set[Word]:
    """The part of a tube outside B(o, radius)"""
    return {x for x in points if group.distance(o, x) > radius}


def region_tube_verdict(x: Word, region: BoundaryRegion, c: HalfInt | int, group: GroupBackend,
                        o: Word = (), delta_hat: HalfInt | int = 0) -> TubeVerdict:
    """
    Membership of x in the union of the tubes of radius c toward the points
    of a region. Distance to the union of rays into a shadow V_r(w) is
    0 when (x, w)_o >= r and |x| - (x, w)_o otherwise, exactly on trees.
    """
    group.require_boundary("region_tube_verdict")
    c = HalfInt.of(c)
    slack = HalfInt.of(delta_hat) * 2
    if region.is_full:
        return TubeVerdict.IN
    verdicts = []
    size = HalfInt.of(group.distance(o, x))
    for s in region.shadows:
        if isinstance(s.base, BoundaryRay):
            product = gromov_product(x, s.base.point(stabilization_depth(x, c, delta_hat, o, group)), o, group)
        else:
            product = gromov_product(x, s.base, o, group)
        gap = ZERO if product >= s.r else size - product
        if gap < c - slack:
            verdicts.append(TubeVerdict.IN)
        elif gap >= c + slack:
            verdicts.append(TubeVerdict.OUT)
        else:
            verdicts.append(TubeVerdict.UNCERTAIN)
    if TubeVerdict.IN in verdicts:
        return TubeVerdict.IN
    if TubeVerdict.UNCERTAIN in verdicts:
        return TubeVerdict.UNCERTAIN
    return TubeVerdict.OUT


def tube_verdicts(tube: TubeSpec, points: Iterable[Word], o: Word = (),
                  delta_hat: HalfInt | int = 0) -> Dict[Word, TubeVerdict]:
    return {x: in_tube(x, tube, o, delta_hat) for x in points}
