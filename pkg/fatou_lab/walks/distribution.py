"""
Step distributions nu and Ancona admissibility checks.
"""
from __future__ import annotations

from bisect import bisect_right
from collections import defaultdict
from fractions import Fraction
from itertools import accumulate
from typing import Dict, List, Optional, Sequence, Tuple, Union

import structlog

from fatou_lab.config import settings
from fatou_lab.core.constants import PROBABILITY_SUM_TOLERANCE
from fatou_lab.core.exceptions import ConfigurationError, NotGenerating
from fatou_lab.core.schemas import AdmissibilityReport, StepKind, StepSpec
from fatou_lab.geometry.metric import ball, check_budget
from fatou_lab.groups.base import GroupBackend, Word

logger = structlog.get_logger(__name__)

Probability = Union[Fraction, float]


def _parse_probability(text: str) -> Probability:
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    return float(text)


class StepDistribution:
    """
    Finitely supported probability measure nu on the group; p(x, y) = nu(x^-1 y).

    Probabilities stay exact Fractions when every weight is given as one.
    """

    def __init__(self, group: GroupBackend, support: Sequence[Tuple[Word, Probability]], label: str = "custom"):
        merged: Dict[Word, Probability] = defaultdict(int)
        for word, prob in support:
            merged[group.normalize(word)] += prob
        items = sorted(merged.items(), key=lambda kv: (len(kv[0]), kv[0]))
        if not items:
            raise ConfigurationError("step distribution has empty support")
        for word, prob in items:
            if prob <= 0:
                raise ConfigurationError(f"probability of {group.format_word(word)} must be > 0")
        total = sum(p for _, p in items)
        if abs(float(total) - 1.0) > PROBABILITY_SUM_TOLERANCE:
            raise ConfigurationError(f"step probabilities sum to {float(total)}, expected 1")

        self.group = group
        self.label = label
        self.words: Tuple[Word, ...] = tuple(w for w, _ in items)
        self.exact: Tuple[Probability, ...] = tuple(p for _, p in items)
        self.probabilities: Tuple[float, ...] = tuple(float(p) for p in self.exact)
        self.cumulative: List[float] = list(accumulate(self.probabilities))
        self._index = {w: i for i, w in enumerate(self.words)}

    def __repr__(self) -> str:
        return f"<StepDistribution {self.label} on {self.group.name}>"

    def __len__(self) -> int:
        return len(self.words)

    @property
    def m1(self) -> int:
        return max(len(w) for w in self.words)

    @property
    def symmetric(self) -> bool:
        for w, p in zip(self.words, self.exact):
            if self.p(self.group.inverse(w)) != p:
                return False
        return True

    @property
    def is_exact(self) -> bool:
        return all(isinstance(p, Fraction) for p in self.exact)

    @property
    def stay(self) -> float:
        return self.p(()) if () in self._index else 0.0

    def p(self, w: Word) -> Probability:
        i = self._index.get(w)
        return 0 if i is None else self.exact[i]

    def draw(self, u: float) -> int:
        """Support index for a uniform draw u in [0, 1)"""
        i = bisect_right(self.cumulative, u * self.cumulative[-1])
        return min(i, len(self.words) - 1)

    def transitions(self, x: Word) -> List[Tuple[Word, float]]:
        return [(self.group.multiply(x, w), p) for w, p in zip(self.words, self.probabilities)]

    def convolution_powers(self, depth: int) -> List[Dict[Word, Probability]]:
        """p^j(o, .) for j = 0..depth"""
        powers: List[Dict[Word, Probability]] = [{(): Fraction(1) if self.is_exact else 1.0}]
        for _ in range(depth):
            nxt: Dict[Word, Probability] = defaultdict(int)
            for x, px in powers[-1].items():
                for w, p in zip(self.words, self.exact):
                    nxt[self.group.multiply(x, w)] += px * p
            powers.append(dict(nxt))
        return powers

    @classmethod
    def from_spec(cls, spec: StepSpec, group: GroupBackend) -> StepDistribution:
        letters = list(group.letters)
        if spec.kind == StepKind.SRW:
            p = Fraction(1, len(letters))
            return cls(group, [((z,), p) for z in letters], label="srw")
        if spec.kind == StepKind.LAZY:
            stay = Fraction(spec.laziness)
            p = (1 - stay) / len(letters)
            return cls(group, [((), stay)] + [((z,), p) for z in letters], label=spec.label)
        pairs = [(group.parse_word(w), _parse_probability(p)) for w, p in spec.weights]
        return cls(group, pairs, label=spec.label)


def simple_random_walk(group: GroupBackend) -> StepDistribution:
    return StepDistribution.from_spec(StepSpec(kind=StepKind.SRW), group)


def point_mass(group: GroupBackend, word: Word | str) -> StepDistribution:
    if isinstance(word, str):
        word = group.parse_word(word)
    return StepDistribution(group, [(word, Fraction(1))], label=f"delta:{group.format_word(group.normalize(word))}")


def check_generating(nu: StepDistribution, radius: int, center: Word = ()) -> None:
    """Every element of B(center, radius) must be a product of support elements"""
    group = nu.group
    limit = radius + 2 * nu.m1
    reachable = {center}
    frontier = [center]
    while frontier:
        nxt = []
        for x in frontier:
            for w in nu.words:
                y = group.multiply(x, w)
                if y not in reachable and group.distance(center, y) <= limit:
                    reachable.add(y)
                    nxt.append(y)
        frontier = nxt
    target = ball(group, radius, center)
    missing = [x for x in target if x not in reachable]
    if missing:
        raise NotGenerating(
            f"support of {nu.label} does not reach {group.format_word(missing[0])} "
            f"(and {len(missing) - 1} more) within B(o,{limit})")


def validate(nu: StepDistribution, check_radius: int = 1, center: Word = (),
             l_cap: Optional[int] = None) -> AdmissibilityReport:
    """
    m1, the least l and the largest c0 with sum_{1<=j<=l} p^j(x, y) >= c0
    whenever d(x, y) <= 1, checked at one center by translation invariance.
    """
    group = nu.group
    l_cap = l_cap or settings.admissibility_l_cap
    m1 = nu.m1
    check_budget(group, check_radius + l_cap * m1)
    check_generating(nu, check_radius, center)

    # p^j(c, c w) = p^j(o, w), so the convolution is taken at the identity
    powers = nu.convolution_powers(l_cap)
    targets = [()] + sorted({group.normalize((z,)) for z in group.letters})
    running = {w: 0 for w in targets}
    for l in range(1, l_cap + 1):
        for w in targets:
            running[w] += powers[l].get(w, 0)
        c0 = min(running.values())
        if c0 > 0:
            logger.info("Admissibility verified", nu=nu.label, m1=m1, l=l, c0=float(c0))
            return AdmissibilityReport(m1=m1, c0=float(c0), l=l, passed=True,
                                       check_radius=check_radius, center=group.format_word(center))
    worst = min(targets, key=lambda w: running[w])
    diagnosis = f"no mass reaches {group.format_word(worst)} within {l_cap} steps"
    logger.warning("Admissibility cap reached", nu=nu.label, l_cap=l_cap, diagnosis=diagnosis)
    return AdmissibilityReport(m1=m1, c0=0.0, l=l_cap, passed=False,
                               check_radius=check_radius, center=group.format_word(center),
                               diagnosis=diagnosis)
