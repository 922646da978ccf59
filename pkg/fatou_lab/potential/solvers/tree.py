"""
Exact first-passage solver for nearest-neighbour walks on free groups.

On a tree every path from x to y passes through the geodesic between them,
so hitting probabilities factor into one-step "up" probabilities (reach the
parent) and "down" probabilities (reach a given child), each a function of
depth and the last letter only. Values cost O(R |Z|) and never need the ball.
"""
from dataclasses import dataclass
from typing import Dict, List, Sequence

import structlog

from fatou_lab.boundary.shadows import BoundaryRegion
from fatou_lab.core.exceptions import PreconditionFailed
from fatou_lab.geometry.metric import ball
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.potential.solvers.base import DirichletSolver
from fatou_lab.potential.tabulated import TabulatedFunction
from fatou_lab.walks.distribution import StepDistribution

logger = structlog.get_logger(__name__)

RESIDUAL_PROBE_RADIUS = 3


def _lcp(x: Word, y: Word) -> int:
    n = 0
    for a, b in zip(x, y):
        if a != b:
            break
        n += 1
    return n


class TreeDirichletSolver(DirichletSolver):
    def __init__(self, group: GroupBackend, nu: StepDistribution, radius: int):
        super().__init__(group, nu, radius)
        self._weight = {z: float(nu.p((z,))) for z in group.letters}
        self._stay = float(nu.stay)
        self._down: Dict[Word, float] = {}
        self._up = self._up_table()

    @property
    def name(self) -> str:
        return "tree"

    @classmethod
    def supports(cls, group: GroupBackend, nu: StepDistribution) -> bool:
        return group.is_tree and nu.m1 <= 1

    def _up_table(self) -> List[Dict[int, float]]:
        """up[n][z]: from a depth-n vertex ending in z, probability of reaching its parent"""
        R = self.radius
        inv = self.group.inverse_letter
        up: List[Dict[int, float]] = [{} for _ in range(R + 1)]
        up[R] = {z: 0.0 for z in self.group.letters}
        for n in range(R - 1, 0, -1):
            for z in self.group.letters:
                back = inv[z]
                escape = sum(w * up[n + 1][c] for c, w in self._weight.items() if c != back)
                up[n][z] = self._weight[back] / (1.0 - self._stay - escape)
        return up

    def up(self, v: Word) -> float:
        if not v or len(v) >= self.radius:
            return 0.0
        return self._up[len(v)][v[-1]]

    def down(self, v: Word) -> float:
        """From the parent of v, probability of ever reaching v before being killed"""
        cached = self._down.get(v)
        if cached is not None:
            return cached
        inv = self.group.inverse_letter
        for k in range(1, len(v) + 1):
            w = v[:k]
            if w in self._down:
                continue
            parent, z = v[: k - 1], v[k - 1]
            back = inv[parent[-1]] if parent else None
            loss = sum(p * self._up[k][c] for c, p in self._weight.items() if c != z and c != back)
            if parent:
                loss += self._weight[back] * self._down[parent]
            self._down[w] = self._weight[z] / (1.0 - self._stay - loss)
        return self._down[v]

    def hit(self, x: Word, y: Word) -> float:
        """P_x(reach y before exiting B(o, R))"""
        if x == y:
            return 1.0
        if len(x) >= self.radius:
            return 0.0
        c = _lcp(x, y)
        value = 1.0
        for k in range(len(x), c, -1):
            value *= self._up[k][x[k - 1]]
        for k in range(c + 1, len(y) + 1):
            value *= self.down(y[:k])
        return value

    def return_green(self, y: Word) -> float:
        """G_R(y, y)"""
        if len(y) >= self.radius:
            raise PreconditionFailed(f"{self.group.format_word(y)} is not inside B(o,{self.radius})")
        inv = self.group.inverse_letter
        back = inv[y[-1]] if y else None
        loss = sum(p * self._up[len(y) + 1][c] for c, p in self._weight.items() if c != back)
        if y:
            loss += self._weight[back] * self.down(y)
        return 1.0 / (1.0 - self._stay - loss)

    def green_value(self, x: Word, y: Word) -> float:
        if len(x) >= self.radius:
            return 0.0
        return self.hit(x, y) * self.return_green(y)

    def martin_value(self, x: Word, y: Word) -> float:
        """G_R(x, y) / G_R(o, y)"""
        return self.hit(x, y) / self.hit((), y)

    def exit_cylinder(self, x: Word, w: Word) -> float:
        """P_x(first exit point extends w)"""
        if not w:
            return 1.0
        if len(w) > self.radius:
            raise PreconditionFailed(f"cylinder {self.group.format_word(w)} is deeper than the exit radius {self.radius}")
        inside = x[: len(w)] == w
        if len(x) >= self.radius:
            return 1.0 if inside else 0.0
        q = self.up(w)
        d = self.down(w)
        at_w = (1.0 - q) / (1.0 - q * d)
        if not inside:
            return self.hit(x, w) * at_w
        at_parent = d * at_w
        rise = 1.0
        for k in range(len(x), len(w) - 1, -1):
            rise *= self._up[k][x[k - 1]]
        return 1.0 - rise * (1.0 - at_parent)

    def _probe(self, u: TabulatedFunction, source=None) -> None:
        probe = ball(self.group, min(RESIDUAL_PROBE_RADIUS, max(self.radius - 1, 0)))
        self.residual = self.harmonic_residual(u, probe, source)
        logger.debug("Tree solution probed", radius=self.radius, label=u.label, residual=self.residual)

    def green(self, y: Word) -> TabulatedFunction:
        return_value = self.return_green(y)
        fn = TabulatedFunction(self.group, self.domain_radius,
                               f"green({self.group.format_word(y)},{self.radius})",
                               evaluator=TreeGreen(self, y, return_value))
        self._probe(fn, y)
        return fn

    def exit_probability(self, region: BoundaryRegion, delta_hat: float = 0) -> TabulatedFunction:
        if region.is_full:
            cylinders: Sequence[Word] = ((),)
        else:
            cylinders = tuple(region.tree_cylinders())
        fn = TabulatedFunction(self.group, self.domain_radius,
                               f"poisson({region.label(self.group)},{self.radius})",
                               evaluator=TreeExit(self, tuple(cylinders)))
        self._probe(fn)
        return fn


@dataclass(frozen=True)
class TreeGreen:
    solver: TreeDirichletSolver
    y: Word
    return_value: float

    def __call__(self, x: Word) -> float:
        if len(x) >= self.solver.radius:
            return 0.0
        return self.solver.hit(x, self.y) * self.return_value


@dataclass(frozen=True)
class TreeExit:
    solver: TreeDirichletSolver
    cylinders: tuple

    def __call__(self, x: Word) -> float:
        return sum(self.solver.exit_cylinder(x, w) for w in self.cylinders)
