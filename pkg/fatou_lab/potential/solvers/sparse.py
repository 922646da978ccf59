from typing import Dict, Optional

import numpy as np
import structlog
from scipy import sparse
from scipy.sparse.linalg import spsolve

from fatou_lab.boundary.shadows import BoundaryRegion
from fatou_lab.config import settings
from fatou_lab.core.constants import RESIDUAL_TARGET
from fatou_lab.core.exceptions import PreconditionFailed, SolverFailure
from fatou_lab.geometry.metric import ball
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.potential.solvers.base import DirichletSolver
from fatou_lab.potential.tabulated import TabulatedFunction
from fatou_lab.walks.distribution import StepDistribution

logger = structlog.get_logger(__name__)


class SparseDirichletSolver(DirichletSolver):
    """
    Explicit ball, killed transition matrix P_R in CSR form.

    Systems (I - P_R) u = b are solved by Jacobi iteration u <- P_R u + b, which
    converges because P_R is substochastic, with a direct solve as fallback.
    """

    def __init__(
        self,
        group: GroupBackend,
        nu: StepDistribution,
        radius: int,
        tolerance: Optional[float] = None,
        max_iterations: Optional[int] = None,
        residual_target: float = RESIDUAL_TARGET,
    ):
        super().__init__(group, nu, radius)
        self.tolerance = tolerance or settings.solver_tolerance
        self.max_iterations = max_iterations or settings.solver_max_iterations
        self.residual_target = residual_target

        self.domain = ball(group, self.domain_radius)
        points = self.domain.order
        self.interior = [x for x in points if self.domain.distance(x) < radius]
        self.boundary = [x for x in points if self.domain.distance(x) >= radius]
        self._interior_index = {x: i for i, x in enumerate(self.interior)}
        self._boundary_index = {x: i for i, x in enumerate(self.boundary)}

        rows_i, cols_i, vals_i = [], [], []
        rows_b, cols_b, vals_b = [], [], []
        for i, x in enumerate(self.interior):
            for y, p in nu.transitions(x):
                j = self._interior_index.get(y)
                if j is not None:
                    rows_i.append(i); cols_i.append(j); vals_i.append(p)
                else:
                    rows_b.append(i); cols_b.append(self._boundary_index[y]); vals_b.append(p)
        n_i, n_b = len(self.interior), len(self.boundary)
        self.P = sparse.csr_matrix((vals_i, (rows_i, cols_i)), shape=(n_i, n_i))
        self.P_exit = sparse.csr_matrix((vals_b, (rows_b, cols_b)), shape=(n_i, n_b))
        self._green: Dict[Word, TabulatedFunction] = {}

        logger.debug("Dirichlet system assembled", radius=radius, interior=n_i, boundary=n_b,
                     nonzeros=self.P.nnz + self.P_exit.nnz)

    @property
    def name(self) -> str:
        return "sparse"

    @classmethod
    def supports(cls, group: GroupBackend, nu: StepDistribution) -> bool:
        return True

    def solve(self, b: np.ndarray) -> np.ndarray:
        u = b.copy()
        iterations = 0
        converged = False
        for iterations in range(1, self.max_iterations + 1):
            nxt = self.P @ u + b
            change = float(np.max(np.abs(nxt - u))) if len(u) else 0.0
            u = nxt
            if change <= self.tolerance:
                converged = True
                break
        residual = self._residual(u, b)
        if not converged or residual > self.residual_target:
            logger.warning("Jacobi iteration short of target, falling back to direct solve",
                           iterations=iterations, residual=residual)
            identity = sparse.identity(self.P.shape[0], format="csc")
            u = np.atleast_1d(spsolve((identity - self.P).tocsc(), b))
            residual = self._residual(u, b)
        if residual > self.residual_target:
            raise SolverFailure(f"residual {residual:.3e} above target {self.residual_target:.1e} "
                                f"on B(o,{self.radius})")
        self.residual = residual
        logger.info("Dirichlet system solved", solver=self.name, radius=self.radius,
                    size=len(u), iterations=iterations, residual=residual)
        return u

    def _residual(self, u: np.ndarray, b: np.ndarray) -> float:
        if not len(u):
            return 0.0
        return float(np.max(np.abs(u - self.P @ u - b)))

    def green(self, y: Word) -> TabulatedFunction:
        if y not in self._interior_index:
            raise PreconditionFailed(f"{self.group.format_word(y)} is not inside B(o,{self.radius})")
        if y in self._green:
            return self._green[y]
        b = np.zeros(len(self.interior))
        b[self._interior_index[y]] = 1.0
        u = self.solve(b)
        values = {x: float(u[i]) for i, x in enumerate(self.interior)}
        values.update({x: 0.0 for x in self.boundary})
        fn = TabulatedFunction(self.group, self.domain_radius,
                               f"green({self.group.format_word(y)},{self.radius})", values=values)
        self._green[y] = fn
        return fn

    def exit_probability(self, region: BoundaryRegion, delta_hat: float = 0) -> TabulatedFunction:
        data = np.array([1.0 if region.contains(s, self.group, delta_hat=delta_hat) else 0.0
                         for s in self.boundary])
        u = self.solve(self.P_exit @ data)
        values = {x: float(u[i]) for i, x in enumerate(self.interior)}
        values.update({x: float(data[i]) for i, x in enumerate(self.boundary)})
        return TabulatedFunction(self.group, self.domain_radius,
                                 f"poisson({region.label(self.group)},{self.radius})", values=values)
