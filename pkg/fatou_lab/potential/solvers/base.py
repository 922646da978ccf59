from abc import ABC, abstractmethod
from typing import Iterable, Optional

from fatou_lab.boundary.shadows import BoundaryRegion
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.potential.tabulated import TabulatedFunction
from fatou_lab.walks.distribution import StepDistribution


class DirichletSolver(ABC):
    """
    Abstract base class for Dirichlet and Green solvers on B(o, R).

    The walk is killed at the first n with d(o, X_n) >= R; returned functions
    live on B(o, R + m1 - 1) and carry their boundary data past the sphere.
    """

    def __init__(self, group: GroupBackend, nu: StepDistribution, radius: int):
        self.group = group
        self.nu = nu
        self.radius = radius
        self.residual = 0.0

    @property
    @abstractmethod
    def name(self) -> str:
        """Solver name"""
        pass

    @classmethod
    @abstractmethod
    def supports(cls, group: GroupBackend, nu: StepDistribution) -> bool:
        """Whether this solver applies to the pair (group, nu)"""
        pass

    @abstractmethod
    def green(self, y: Word) -> TabulatedFunction:
        """G_R(., y): expected visits to y before exiting B(o, R)"""
        pass

    @abstractmethod
    def exit_probability(self, region: BoundaryRegion, delta_hat: float = 0) -> TabulatedFunction:
        """P_x(first exit point of B(o, R) lies in the region)"""
        pass

    @property
    def domain_radius(self) -> int:
        return self.radius + self.nu.m1 - 1

    def harmonic_residual(self, u: TabulatedFunction, points: Iterable[Word], source: Optional[Word] = None) -> float:
        """max |sum_y p(x,y) u(y) - u(x)| over interior points, plus 1 at the source"""
        worst = 0.0
        for x in points:
            if len(x) >= self.radius:
                continue
            total = sum(p * u(y) for y, p in self.nu.transitions(x))
            if x == source:
                total += 1.0
            worst = max(worst, abs(total - u(x)))
        return worst
