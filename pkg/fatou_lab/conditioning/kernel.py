"""
Doob h-transform of the walk toward a boundary point.

p^h(x, y) = p(x, y) h(y) / h(x) with h = K(., theta(depth)). Rows are
renormalised by their actual sum and the defect is recorded, never hidden.
"""
from __future__ import annotations

from bisect import bisect_right
from itertools import accumulate
from typing import Dict, List, Optional, Tuple, Union

import structlog

from fatou_lab.boundary.rays import BoundaryRay
from fatou_lab.config import settings
from fatou_lab.core.constants import DEGENERATE_ROW_MASS
from fatou_lab.core.exceptions import DegenerateRow
from fatou_lab.core.schemas import StabilizationReport
from fatou_lab.groups.base import Word
from fatou_lab.potential.green import boundary_stabilization, martin_function
from fatou_lab.potential.tabulated import TabulatedFunction
from fatou_lab.walks.distribution import StepDistribution

logger = structlog.get_logger(__name__)

Row = Tuple[Tuple[Word, ...], List[float], float, float]


class ConditionedKernel:
    def __init__(
        self,
        base: StepDistribution,
        h: TabulatedFunction,
        theta: Optional[Union[BoundaryRay, Word]] = None,
        depth: Optional[int] = None,
        stabilization: Optional[StabilizationReport] = None,
        renorm_tolerance: Optional[float] = None,
    ):
        self.base = base
        self.group = base.group
        self.h = h
        self.theta = theta
        self.depth = depth
        self.stabilization = stabilization
        self.renorm_tolerance = settings.renorm_tolerance if renorm_tolerance is None else renorm_tolerance
        self.max_defect = 0.0
        self._rows: Dict[Word, Row] = {}

    def __repr__(self) -> str:
        return f"<ConditionedKernel toward {self.target_label} via {self.h.label}>"

    @property
    def target_label(self) -> str:
        if isinstance(self.theta, BoundaryRay):
            return self.theta.description
        if self.theta is None:
            return self.h.label
        return self.group.format_word(self.theta)

    @property
    def m1(self) -> int:
        return self.base.m1

    @classmethod
    def toward(cls, theta: BoundaryRay, nu: StepDistribution, depth: int, radius: Optional[int] = None,
               probe: Optional[Word] = None) -> ConditionedKernel:
        """h = K(., theta(depth)), with the stabilisation of K(probe, theta(n)) near that depth attached"""
        group = nu.group
        group.require_boundary("ConditionedKernel.toward")
        h = martin_function(theta, nu, group, depth=depth, radius=radius)
        probe = probe if probe is not None else group.normalize((group.letters[0],))
        depths = [n for n in (depth - 4, depth - 2, depth) if n >= 1]
        _, report = boundary_stabilization(probe, theta, nu, group, depths)
        if not report.stabilized:
            logger.warning("Conditioning on an unstabilised Martin kernel", theta=theta.description,
                           depth=depth, final_deviation=report.final_deviation)
        return cls(nu, h, theta, depth, report)

    @classmethod
    def toward_point(cls, y: Word, nu: StepDistribution, radius: Optional[int] = None) -> ConditionedKernel:
        """h = K(., y) for a point y instead of a boundary point"""
        h = martin_function(y, nu, nu.group, radius=radius)
        return cls(nu, h, y, len(y))

    def row(self, x: Word) -> Row:
        """(targets, cumulative weights, total, defect) at x, before renormalisation"""
        cached = self._rows.get(x)
        if cached is not None:
            return cached
        hx = self.h(x)
        if hx <= 0:
            raise DegenerateRow(f"h({self.group.format_word(x)}) = {hx} is not positive")
        targets = tuple(self.group.multiply(x, w) for w in self.base.words)
        weights = [p * (self.h(y) / hx) for y, p in zip(targets, self.base.probabilities)]
        cumulative = list(accumulate(weights))
        total = cumulative[-1]
        if total < DEGENERATE_ROW_MASS:
            raise DegenerateRow(f"row at {self.group.format_word(x)} has mass {total:.3e}")
        defect = abs(total - 1.0)
        if defect > self.renorm_tolerance:
            logger.warning("Conditioned row renormalised", x=self.group.format_word(x), defect=defect,
                           tolerance=self.renorm_tolerance)
        self.max_defect = max(self.max_defect, defect)
        row = (targets, cumulative, total, defect)
        self._rows[x] = row
        return row

    def transitions(self, x: Word) -> List[Tuple[Word, float]]:
        """Renormalised (y, p^h(x, y)) pairs, merged by target"""
        targets, cumulative, total, _ = self.row(x)
        merged: Dict[Word, float] = {}
        previous = 0.0
        for y, c in zip(targets, cumulative):
            merged[y] = merged.get(y, 0.0) + (c - previous) / total
            previous = c
        return list(merged.items())

    def row_defect(self, x: Word) -> float:
        return self.row(x)[3]

    def draw(self, x: Word, u: float) -> Tuple[Word, float]:
        targets, cumulative, total, defect = self.row(x)
        i = min(bisect_right(cumulative, u * total), len(targets) - 1)
        return targets[i], defect


def h_transition(x: Word, y: Word, k: ConditionedKernel) -> float:
    """p^h(x, y) after renormalisation of the row at x"""
    for target, p in k.transitions(x):
        if target == y:
            return p
    return 0.0
