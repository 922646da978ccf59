"""
Trajectory simulation: stop rules, single steps, exit proxies and T_m.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import structlog

from fatou_lab.config import settings
from fatou_lab.core.constants import INFINITY, Unbounded
from fatou_lab.core.exceptions import NeverExited, StepBudgetExceeded
from fatou_lab.core.schemas import StopKind
from fatou_lab.geometry.metric import ball
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.walks.distribution import StepDistribution
from fatou_lab.walks.rng import RngStream, UniformFeed

logger = structlog.get_logger(__name__)


# ========== STOP RULES ==========


@dataclass(frozen=True)
class FixedSteps:
    n: int

    kind = StopKind.FIXED_STEPS

    def done(self, n: int, x: Word, group: GroupBackend) -> bool:
        return n >= self.n

    @property
    def bounded(self) -> bool:
        return True


@dataclass(frozen=True)
class ExitBall:
    """Stops at the first n with d(center, X_n) >= radius"""
    radius: int
    center: Word = ()

    kind = StopKind.EXIT_BALL

    def done(self, n: int, x: Word, group: GroupBackend) -> bool:
        if not self.center:
            return len(x) >= self.radius
        return group.distance(self.center, x) >= self.radius

    @property
    def bounded(self) -> bool:
        return False


@dataclass(frozen=True)
class FirstOf:
    rules: Tuple[Union[FixedSteps, ExitBall], ...]

    kind = StopKind.FIRST_OF

    def done(self, n: int, x: Word, group: GroupBackend) -> bool:
        return any(rule.done(n, x, group) for rule in self.rules)

    @property
    def bounded(self) -> bool:
        return any(rule.bounded for rule in self.rules)


StopRule = Union[FixedSteps, ExitBall, FirstOf]


# ========== TRAJECTORIES ==========


@dataclass
class Trajectory:
    start: Word
    positions: List[Word]
    seed: Dict[str, Any] = field(default_factory=dict)
    conditioned: Optional[Dict[str, Any]] = None

    def __post_init__(self) -> None:
        if not self.positions or self.positions[0] != self.start:
            raise ValueError("trajectory must begin at its start point")

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def steps(self) -> int:
        return len(self.positions) - 1

    @property
    def last(self) -> Word:
        return self.positions[-1]

    def to_json(self, group: GroupBackend) -> str:
        record: Dict[str, Any] = {
            "seed": self.seed,
            "positions": [group.format_word(x) for x in self.positions],
        }
        if self.conditioned is not None:
            record.update(self.conditioned)
        return json.dumps(record, sort_keys=True)


# ========== SIMULATION ==========


def _feed(rng: Union[RngStream, np.random.Generator, UniformFeed]) -> UniformFeed:
    if isinstance(rng, UniformFeed):
        return rng
    if isinstance(rng, RngStream):
        return UniformFeed(rng.generator())
    return UniformFeed(rng)


def step(x: Word, nu: StepDistribution, group: GroupBackend,
         rng: Union[RngStream, np.random.Generator, UniformFeed]) -> Word:
    """One transition x -> x z with z ~ nu"""
    feed = _feed(rng)
    return group.multiply(x, nu.words[nu.draw(feed.next())])


def run(z: Word, group: GroupBackend, stop: StopRule, next_point: Callable[[Word, int], Word],
        step_cap: Optional[int] = None) -> List[Word]:
    """
    Drive a chain from z with next_point(x, n) until the stop rule fires.

    Raises StepBudgetExceeded at the hard cap.
    """
    cap = step_cap if step_cap is not None else settings.step_cap
    positions = [z]
    x = z
    n = 0
    while not stop.done(n, x, group):
        if n >= cap:
            raise StepBudgetExceeded(f"stop rule not reached within {cap} steps from {group.format_word(z)}")
        x = next_point(x, n)
        positions.append(x)
        n += 1
    return positions


def simulate(z: Word, nu: StepDistribution, group: GroupBackend, stop: StopRule,
             rng: Union[RngStream, np.random.Generator], step_cap: Optional[int] = None) -> Trajectory:
    feed = _feed(rng)
    words = nu.words
    multiply = group.multiply
    draw = nu.draw

    def next_point(x: Word, _n: int) -> Word:
        return multiply(x, words[draw(feed.next())])

    positions = run(z, group, stop, next_point, step_cap)
    seed = rng.describe() if isinstance(rng, RngStream) else {}
    return Trajectory(start=z, positions=positions, seed=seed)


def exit_proxy(t: Trajectory, radius: int, o: Word = (), group: Optional[GroupBackend] = None) -> Word:
    """X_n at the first n with d(o, X_n) >= radius"""
    for x in t.positions:
        d = len(x) if group is None or not o else group.distance(o, x)
        if d >= radius:
            return x
    raise NeverExited(f"trajectory of {t.steps} steps never reaches distance {radius}")


def exit_index(t: Trajectory, radius: int, o: Word = (), group: Optional[GroupBackend] = None) -> int:
    for n, x in enumerate(t.positions):
        d = len(x) if group is None or not o else group.distance(o, x)
        if d >= radius:
            return n
    raise NeverExited(f"trajectory of {t.steps} steps never reaches distance {radius}")


def thickened_sup(u: Any, x: Word, m1: int, group: GroupBackend, cache: Optional[Dict[Word, float]] = None) -> float:
    """max |u(y)| over d(x, y) <= m1"""
    if cache is not None and x in cache:
        return cache[x]
    value = max(abs(u(y)) for y in ball(group, m1, x))
    if cache is not None:
        cache[x] = value
    return value


def stopping_time_Tm(t: Trajectory, u: Any, m: float, m1: int,
                     group: GroupBackend) -> Union[int, Unbounded]:
    """T_m = inf{n : max{|u(y)| : d(y, X_n) <= m1} > m}, or INFINITY"""
    cache: Dict[Word, float] = {}
    for n, x in enumerate(t.positions):
        if thickened_sup(u, x, m1, group, cache) > m:
            return n
    return INFINITY
