from .base import DirichletSolver
from .sparse import SparseDirichletSolver
from .tree import TreeDirichletSolver
from .factory import build_solver, cached_solver

__all__ = ["DirichletSolver", "SparseDirichletSolver", "TreeDirichletSolver", "build_solver", "cached_solver"]
