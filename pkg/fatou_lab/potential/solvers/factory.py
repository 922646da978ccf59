from functools import lru_cache
from typing import Optional

import structlog

from fatou_lab.config import SolverChoice, settings
from fatou_lab.core.exceptions import ConfigurationError
from fatou_lab.groups.base import GroupBackend
from fatou_lab.potential.solvers.base import DirichletSolver
from fatou_lab.potential.solvers.sparse import SparseDirichletSolver
from fatou_lab.potential.solvers.tree import TreeDirichletSolver
from fatou_lab.walks.distribution import StepDistribution

logger = structlog.get_logger(__name__)


def build_solver(group: GroupBackend, nu: StepDistribution, radius: int,
                 choice: Optional[SolverChoice] = None) -> DirichletSolver:
    """Initialize the configured solver; auto prefers the tree solver where it applies"""
    choice = SolverChoice(choice or settings.solver)
    if choice == SolverChoice.TREE:
        if not TreeDirichletSolver.supports(group, nu):
            raise ConfigurationError(f"tree solver needs a free group and nearest-neighbour steps, got {group.name}")
        return TreeDirichletSolver(group, nu, radius)
    if choice == SolverChoice.AUTO and TreeDirichletSolver.supports(group, nu):
        return TreeDirichletSolver(group, nu, radius)
    return SparseDirichletSolver(group, nu, radius)


@lru_cache(maxsize=32)
def cached_solver(group: GroupBackend, nu: StepDistribution, radius: int,
                  choice: Optional[SolverChoice] = None) -> DirichletSolver:
    """build_solver, shared across calls with the same group, walk and radius"""
    return build_solver(group, nu, radius, choice)
