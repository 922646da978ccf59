"""
Functions on a ball B(center, radius), given by a table or computed lazily.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence, TextIO, Tuple

import structlog

from fatou_lab.core.constants import FUNCTION_CSV_HEADER
from fatou_lab.core.exceptions import OutOfTabulatedRange
from fatou_lab.geometry.metric import Ball
from fatou_lab.groups.base import GroupBackend, Word

logger = structlog.get_logger(__name__)


class TabulatedFunction:
    """
    u : B(center, radius) -> R with a provenance label.

    Either every value is stored up front, or an evaluator computes values on
    demand and they are memoised. Both raise OutOfTabulatedRange off the ball.
    """

    def __init__(
        self,
        group: GroupBackend,
        radius: int,
        label: str = "custom",
        values: Optional[Dict[Word, float]] = None,
        evaluator: Optional[Callable[[Word], float]] = None,
        center: Word = (),
        poles: Sequence = (),
    ):
        if values is None and evaluator is None:
            raise ValueError("a tabulated function needs values or an evaluator")
        self.group = group
        self.radius = radius
        self.label = label
        self.center = center
        self.poles = tuple(poles)
        self._values: Dict[Word, float] = dict(values) if values else {}
        self._evaluator = evaluator

    def __repr__(self) -> str:
        return f"<TabulatedFunction {self.label} on B({self.group.format_word(self.center)},{self.radius})>"

    @property
    def is_lazy(self) -> bool:
        return self._evaluator is not None

    def in_domain(self, x: Word) -> bool:
        if not self.center:
            return len(x) <= self.radius
        return self.group.distance(self.center, x) <= self.radius

    def __call__(self, x: Word) -> float:
        value = self._values.get(x)
        if value is not None:
            return value
        if not self.in_domain(x):
            raise OutOfTabulatedRange(f"{self.label} is not tabulated at {self.group.format_word(x)} "
                                      f"(radius {self.radius})")
        if self._evaluator is None:
            raise OutOfTabulatedRange(f"{self.label} has no value at {self.group.format_word(x)}")
        value = float(self._evaluator(x))
        self._values[x] = value
        return value

    def items(self) -> Iterable[Tuple[Word, float]]:
        return sorted(self._values.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def tabulate(self, points: Iterable[Word]) -> Dict[Word, float]:
        return {x: self(x) for x in points}

    def dump_csv(self, out: TextIO, points: Optional[Iterable[Word]] = None) -> None:
        """CSV (word, value) over the given points, or over the values computed so far"""
        writer = csv.writer(out)
        writer.writerow(FUNCTION_CSV_HEADER)
        rows = self.tabulate(points).items() if points is not None else self.items()
        for x, value in sorted(rows, key=lambda kv: (len(kv[0]), kv[0])):
            writer.writerow([self.group.format_word(x), repr(value)])

    @classmethod
    def from_ball(cls, domain: Ball, fn: Callable[[Word], float], group: GroupBackend,
                  label: str = "custom") -> TabulatedFunction:
        values = {x: float(fn(x)) for x in domain}
        return cls(group, domain.radius, label, values=values, center=domain.center)

    @classmethod
    def constant(cls, value: float, group: GroupBackend, radius: int) -> TabulatedFunction:
        return cls(group, radius, f"const({value:g})", evaluator=ConstantValue(value))

    @classmethod
    def combine(cls, terms: Sequence[Tuple[float, TabulatedFunction]], label: Optional[str] = None) -> TabulatedFunction:
        """Linear combination sum c_i u_i on the intersection of the domains"""
        if not terms:
            raise ValueError("empty linear combination")
        group = terms[0][1].group
        radius = min(u.radius for _, u in terms)
        poles = tuple(p for _, u in terms for p in u.poles)
        if label is None:
            label = " + ".join(f"{c:g}*{u.label}" for c, u in terms)
        return cls(group, radius, label, evaluator=LinearCombination(tuple(terms)), poles=poles)


@dataclass(frozen=True)
class ConstantValue:
    value: float

    def __call__(self, x: Word) -> float:
        return self.value


@dataclass(frozen=True)
class LinearCombination:
    terms: Tuple[Tuple[float, TabulatedFunction], ...]

    def __call__(self, x: Word) -> float:
        return sum(c * u(x) for c, u in self.terms)


@dataclass(frozen=True)
class Indicator:
    """1 on a finite set of points, scaled"""
    points: frozenset
    scale: float = 1.0

    def __call__(self, x: Word) -> float:
        return self.scale if x in self.points else 0.0


@dataclass(frozen=True)
class WordLength:
    def __call__(self, x: Word) -> float:
        return float(len(x))
