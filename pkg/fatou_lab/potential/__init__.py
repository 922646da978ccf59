from .tabulated import TabulatedFunction
from .solvers import DirichletSolver, SparseDirichletSolver, TreeDirichletSolver, build_solver, cached_solver
from .green import (
    laplacian,
    is_harmonic,
    green_mc,
    green_linear,
    green_estimate_linear,
    martin_kernel,
    martin_kernel_at_boundary,
    boundary_stabilization,
    martin_function,
)
from .measure import SphereCell, ShadowBins, harmonic_measure, exit_frequency, poisson_integral
from .martingale import martingale_check

__all__ = [
    "TabulatedFunction",
    "DirichletSolver",
    "SparseDirichletSolver",
    "TreeDirichletSolver",
    "build_solver",
    "cached_solver",
    "laplacian",
    "is_harmonic",
    "green_mc",
    "green_linear",
    "green_estimate_linear",
    "martin_kernel",
    "martin_kernel_at_boundary",
    "boundary_stabilization",
    "martin_function",
    "SphereCell",
    "ShadowBins",
    "harmonic_measure",
    "exit_frequency",
    "poisson_integral",
    "martingale_check",
]
