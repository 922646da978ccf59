"""
Word metric on the Cayley graph: balls, distances, geodesics, Gromov products.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, TextIO, Tuple

import numpy as np
import structlog

from fatou_lab.config import settings
from fatou_lab.core.constants import BALL_CSV_HEADER, Unbounded
from fatou_lab.core.exceptions import BudgetExceeded, PreconditionFailed
from fatou_lab.core.numbers import HalfInt
from fatou_lab.groups.base import GroupBackend, Word

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class Ball:
    """Exhaustive B(center, radius) with BFS distances and parents"""
    center: Word
    radius: int
    elements: Dict[Word, Tuple[int, Optional[Word]]]
    order: Tuple[Word, ...] = field(repr=False)

    def __contains__(self, x: Word) -> bool:
        return x in self.elements

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Word]:
        return iter(self.order)

    def distance(self, x: Word) -> int:
        return self.elements[x][0]

    def parent(self, x: Word) -> Optional[Word]:
        return self.elements[x][1]

    def sphere(self, n: int) -> List[Word]:
        return [x for x in self.order if self.elements[x][0] == n]

    def interior(self) -> List[Word]:
        return [x for x in self.order if self.elements[x][0] < self.radius]

    def dump_csv(self, out: TextIO, group: GroupBackend) -> None:
        writer = csv.writer(out)
        writer.writerow(BALL_CSV_HEADER)
        for x in self.order:
            d, parent = self.elements[x]
            writer.writerow([group.format_word(x), d, "" if parent is None else group.format_word(parent)])


@dataclass(frozen=True)
class GeodesicSegment:
    vertices: Tuple[Word, ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def first(self) -> Word:
        return self.vertices[0]

    @property
    def last(self) -> Word:
        return self.vertices[-1]


def check_budget(group: GroupBackend, radius: int, budget: Optional[int] = None) -> int:
    budget = budget or settings.ball_element_budget
    estimate = group.growth_estimate(radius)
    if estimate > budget:
        logger.warning("Ball over budget", group=group.name, radius=radius,
                       estimate=estimate, budget=budget)
        raise BudgetExceeded(
            f"B(o,{radius}) in {group.name} has an estimated {estimate} elements, budget {budget}")
    return estimate


def ball(group: GroupBackend, radius: int, center: Word = (), budget: Optional[int] = None) -> Ball:
    """Breadth-first ball; each sphere is scanned in lexicographic order so parents are lex-least"""
    if radius < 0:
        raise PreconditionFailed("radius must be >= 0")
    check_budget(group, radius, budget)
    offsets: Dict[Word, Tuple[int, Optional[Word]]] = {(): (0, None)}
    order: List[Word] = [()]
    layer: List[Word] = [()]
    for n in range(radius):
        nxt: List[Word] = []
        for u in layer:
            for z in group.letters:
                v = group.multiply(u, (z,))
                if v not in offsets:
                    offsets[v] = (n + 1, u)
                    nxt.append(v)
        order += nxt
        layer = nxt
    if center:
        elements = {}
        for w in order:
            d, p = offsets[w]
            elements[group.multiply(center, w)] = (d, None if p is None else group.multiply(center, p))
        order = [group.multiply(center, w) for w in order]
    else:
        elements = offsets
    logger.debug("Ball built", group=group.name, radius=radius, size=len(elements))
    return Ball(center=center, radius=radius, elements=elements, order=tuple(order))


def distance(x: Word, y: Word, group: GroupBackend, limit: Optional[int] = None) -> int | Unbounded:
    return group.distance(x, y, limit)


def geodesic(x: Word, y: Word, group: GroupBackend) -> GeodesicSegment:
    """The geodesic through x times the prefixes of the canonical word of x^-1 y"""
    w = group.multiply(group.inverse(x), y)
    vertices = tuple(group.multiply(x, w[:i]) for i in range(len(w) + 1))
    return GeodesicSegment(vertices=vertices)


def gromov_product(x: Word, y: Word, base: Word, group: GroupBackend) -> HalfInt:
    """(x, y)_base = 1/2 [d(x, base) + d(y, base) - d(x, y)]"""
    return HalfInt(group.distance(x, base) + group.distance(y, base) - group.distance(x, y))


def distance_matrix(points: Sequence[Word], group: GroupBackend) -> np.ndarray:
    n = len(points)
    dtype = np.int16 if n < 30_000 else np.int32
    matrix = np.zeros((n, n), dtype=dtype)
    if group.is_tree:
        lengths = [len(p) for p in points]
        for i, p in enumerate(points):
            for j in range(i + 1, n):
                q = points[j]
                k = 0
                m = min(lengths[i], lengths[j])
                while k < m and p[k] == q[k]:
                    k += 1
                matrix[i, j] = matrix[j, i] = lengths[i] + lengths[j] - 2 * k
        return matrix
    inverses = [group.inverse(p) for p in points]
    for i in range(n):
        for j in range(i + 1, n):
            matrix[i, j] = matrix[j, i] = len(group.multiply(inverses[i], points[j]))
    return matrix


def point_to_segment(p: Word, segment: GeodesicSegment, group: GroupBackend) -> int:
    return min(group.distance(p, q) for q in segment.vertices)


def thinness(x: Word, y: Word, z: Word, group: GroupBackend) -> int:
    """Largest distance from a vertex of one side of the canonical triangle to the union of the other two"""
    sides = [geodesic(x, y, group), geodesic(y, z, group), geodesic(z, x, group)]
    worst = 0
    for i, side in enumerate(sides):
        others = [sides[j] for j in range(3) if j != i]
        for p in side.vertices:
            d = min(point_to_segment(p, s, group) for s in others)
            if d > worst:
                worst = d
    return worst
