"""
Computable boundary points, realised as geodesic rays from the identity.
"""
from __future__ import annotations

from enum import Enum
from typing import Any, Dict, List, Optional

import structlog

from fatou_lab.core.exceptions import InvalidRay
from fatou_lab.groups.base import GroupBackend, Word

logger = structlog.get_logger(__name__)


class RayKind(str, Enum):
    PERIODIC = "periodic"
    FROZEN = "frozen"
    TRANSLATED = "translated"


class BoundaryRay:
    """
    A geodesic ray n -> point(n) with point(0) = o and d(o, point(n)) = n.

    Points are generated on demand and cached, so a ray is a pure function
    of n and safe to share read-only.
    """

    def __init__(
        self,
        group: GroupBackend,
        kind: RayKind,
        word: Word,
        source: Optional[BoundaryRay] = None,
        seed: Optional[Dict[str, Any]] = None,
    ):
        self.group = group
        self.kind = kind
        self.word = word
        self.source = source
        self.seed = seed
        self._points: List[Word] = [()]
        self._greedy = False
        if kind == RayKind.PERIODIC:
            if not word:
                raise InvalidRay("periodic rays need a non-empty word")
            self.point(4 * len(word))

    @property
    def description(self) -> str:
        fmt = self.group.format_word
        if self.kind == RayKind.PERIODIC:
            return f"({fmt(self.word)})^inf"
        if self.kind == RayKind.FROZEN:
            return f"frozen:{fmt(self.word)}"
        return f"{fmt(self.word)}.{self.source.description}"

    def __repr__(self) -> str:
        return f"<BoundaryRay {self.description}>"

    def point(self, n: int) -> Word:
        if n < 0:
            raise ValueError("ray index must be >= 0")
        while len(self._points) <= n:
            self._points.append(self._next(len(self._points)))
        return self._points[n]

    def prefix(self, n: int) -> List[Word]:
        self.point(n)
        return self._points[: n + 1]

    def _accept(self, n: int, candidate: Word) -> Word:
        previous = self._points[n - 1]
        if len(candidate) != n or self.group.distance(previous, candidate) != 1:
            raise InvalidRay(f"{self.description} is not geodesic at step {n}")
        return candidate

    def _next(self, n: int) -> Word:
        group = self.group
        previous = self._points[n - 1]
        if self.kind == RayKind.PERIODIC:
            letter = self.word[(n - 1) % len(self.word)]
            return self._accept(n, group.multiply(previous, (letter,)))
        if self.kind == RayKind.FROZEN:
            if n <= len(self.word):
                return group.multiply((), self.word[:n])
            return self._continue(previous, n)
        # translated: the point at distance n on the geodesic toward g . source(m)
        g = self.word
        far = group.multiply(g, self.source.point(n + 2 * len(g) + 2))
        return self._accept(n, group.multiply((), far[:n]))

    def _continue(self, previous: Word, n: int) -> Word:
        """Beyond the frozen exit point: repeat the last letter, or the least letter that keeps going out"""
        group = self.group
        if not self._greedy and self.word:
            candidate = group.multiply(previous, (self.word[-1],))
            if len(candidate) == n:
                return candidate
            self._greedy = True
        for z in group.letters:
            candidate = group.multiply(previous, (z,))
            if len(candidate) == n:
                return candidate
        raise InvalidRay(f"{self.description} cannot be continued past {n - 1}")

    def to_dict(self, depth: Optional[int] = None) -> Dict[str, Any]:
        data: Dict[str, Any] = {"type": self.kind.value, "word": self.group.format_word(self.word)}
        if self.seed is not None:
            data["trajectory_seed"] = self.seed
        if self.source is not None:
            data["source"] = self.source.to_dict()
        if depth is not None:
            data["depth"] = depth
        return data

    @classmethod
    def from_dict(cls, group: GroupBackend, data: Dict[str, Any]) -> BoundaryRay:
        kind = RayKind(data["type"])
        word = group.word(data["word"])
        if kind == RayKind.PERIODIC:
            return periodic_ray(group, word)
        if kind == RayKind.FROZEN:
            return frozen_ray(group, word, seed=data.get("trajectory_seed"))
        return translate_ray(cls.from_dict(group, data["source"]), word)


def periodic_ray(group: GroupBackend, word: Word | str) -> BoundaryRay:
    """The ray through the prefixes of w w w ...; valid when |w^n| = n|w|"""
    if isinstance(word, str):
        word = group.word(word)
    group.require_boundary("periodic_ray")
    return BoundaryRay(group, RayKind.PERIODIC, word)


def frozen_ray(group: GroupBackend, exit_point: Word, seed: Optional[Dict[str, Any]] = None) -> BoundaryRay:
    """The geodesic toward a trajectory's exit point, continued periodically beyond it"""
    return BoundaryRay(group, RayKind.FROZEN, exit_point, seed=seed)


def translate_ray(theta: BoundaryRay, g: Word | str) -> BoundaryRay:
    """The ray from o toward g . theta"""
    group = theta.group
    if isinstance(g, str):
        g = group.word(g)
    if not g:
        return theta
    return BoundaryRay(group, RayKind.TRANSLATED, g, source=theta)
