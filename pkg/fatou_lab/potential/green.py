"""
Laplacian, Green functions and Martin kernels.

Monte-Carlo and linear-solve estimators are kept independent so that each
serves as a check on the other.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from fatou_lab.boundary.rays import BoundaryRay
from fatou_lab.config import settings
from fatou_lab.core.constants import DIVISION_STABILITY_FACTOR
from fatou_lab.core.exceptions import DivisionUnstable, NotStabilized, PreconditionFailed
from fatou_lab.core.schemas import GreenEstimate, GreenMethod, HarmonicityReport, StabilizationReport
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.potential.solvers import TreeDirichletSolver, cached_solver
from fatou_lab.potential.tabulated import TabulatedFunction
from fatou_lab.walks.batch import PlainSimulator, map_trajectories
from fatou_lab.walks.distribution import StepDistribution
from fatou_lab.walks.engine import ExitBall, Trajectory

logger = structlog.get_logger(__name__)


# ========== LAPLACIAN ==========


def laplacian(f: TabulatedFunction, x: Word, nu: StepDistribution, group: GroupBackend) -> float:
    """sum_y p(x, y) f(y) - f(x)"""
    return sum(p * f(group.multiply(x, w)) for w, p in zip(nu.words, nu.probabilities)) - f(x)


def is_harmonic(f: TabulatedFunction, region: Iterable[Word], nu: StepDistribution, group: GroupBackend,
                tol: float = 1e-9) -> HarmonicityReport:
    worst, worst_point, size = 0.0, None, 0
    for x in region:
        size += 1
        value = abs(laplacian(f, x, nu, group))
        if value > worst or worst_point is None:
            worst, worst_point = value, x
    passed = worst <= tol
    logger.debug("Harmonicity checked", label=f.label, region_size=size, max_abs_laplacian=worst, passed=passed)
    return HarmonicityReport(
        max_abs_laplacian=worst,
        worst_point=group.format_word(worst_point) if worst_point is not None else None,
        region_size=size,
        tolerance=tol,
        passed=passed,
    )


# ========== GREEN FUNCTION ==========


@dataclass(frozen=True)
class VisitCount:
    target: Word

    def __call__(self, t: Trajectory) -> int:
        return sum(1 for x in t.positions if x == self.target)


def green_mc(x: Word, y: Word, nu: StepDistribution, group: GroupBackend, n_traj: int, radius: int,
             seed: int, workers: Optional[int] = None, start_index: int = 0) -> GreenEstimate:
    """Mean number of visits to y before the walk from x leaves B(o, radius)"""
    group.require_boundary("green_mc")
    if len(y) + 1 > radius:
        raise PreconditionFailed(f"{group.format_word(y)} lies outside the exit radius {radius}")
    counts = np.asarray(
        map_trajectories(PlainSimulator(x, nu, group, ExitBall(radius)), n_traj, seed,
                         reducer=VisitCount(y), start_index=start_index, workers=workers),
        dtype=float,
    )
    value = float(counts.mean())
    stderr = float(counts.std(ddof=1) / np.sqrt(n_traj)) if n_traj > 1 else 0.0
    logger.info("Green function sampled", x=group.format_word(x), y=group.format_word(y),
                radius=radius, n_traj=n_traj, value=value, stderr=stderr)
    return GreenEstimate(x=group.format_word(x), y=group.format_word(y), value=value,
                         method=GreenMethod.MONTE_CARLO, stderr=stderr, truncation_radius=radius,
                         n_traj=n_traj, seed=seed)


def green_linear(y: Word, nu: StepDistribution, group: GroupBackend, radius: int) -> TabulatedFunction:
    """G_R(., y), solving (I - P_R) G = e_y with killing outside B(o, R)"""
    group.require_boundary("green_linear")
    return cached_solver(group, nu, radius).green(y)


def green_estimate_linear(x: Word, y: Word, nu: StepDistribution, group: GroupBackend,
                          radius: int) -> GreenEstimate:
    value = green_linear(y, nu, group, radius)(x)
    return GreenEstimate(x=group.format_word(x), y=group.format_word(y), value=value,
                         method=GreenMethod.LINEAR, truncation_radius=radius)


# ========== MARTIN KERNEL ==========


def martin_kernel(x: Word, y: Word, nu: StepDistribution, group: GroupBackend,
                  method: GreenMethod = GreenMethod.LINEAR, radius: Optional[int] = None,
                  n_traj: int = 10_000, seed: Optional[int] = None, workers: Optional[int] = None) -> float:
    """K(x, y) = G(x, y) / G(o, y), both sides from the same method"""
    radius = radius or len(y) + settings.martin_margin
    if method == GreenMethod.LINEAR:
        group.require_boundary("martin_kernel")
        solver = cached_solver(group, nu, radius)
        if isinstance(solver, TreeDirichletSolver):
            denominator = solver.hit((), y)
            if denominator <= 0:
                raise DivisionUnstable(f"G(o,{group.format_word(y)}) vanishes at radius {radius}")
            return solver.hit(x, y) / denominator
        green = solver.green(y)
        denominator = green(())
        if denominator <= 0:
            raise DivisionUnstable(f"G(o,{group.format_word(y)}) vanishes at radius {radius}")
        return green(x) / denominator

    seed = settings.default_seed if seed is None else seed
    top = green_mc(x, y, nu, group, n_traj, radius, seed, workers)
    bottom = green_mc((), y, nu, group, n_traj, radius, seed, workers, start_index=n_traj)
    if bottom.value <= 0 or bottom.value < DIVISION_STABILITY_FACTOR * (bottom.stderr or 0.0):
        raise DivisionUnstable(f"G(o,{group.format_word(y)}) = {bottom.value:.3g} "
                               f"is within noise (stderr {bottom.stderr:.3g})")
    return top.value / bottom.value


def boundary_stabilization(x: Word, theta: BoundaryRay, nu: StepDistribution, group: GroupBackend,
                           depths: Sequence[int], method: GreenMethod = GreenMethod.LINEAR,
                           tolerance: Optional[float] = None, **kwargs) -> Tuple[float, StabilizationReport]:
    """K(x, theta(n)) over increasing depths, reported without judging the outcome"""
    if not depths or list(depths) != sorted(set(depths)):
        raise PreconditionFailed("depths must be non-empty and strictly increasing")
    tolerance = settings.stabilization_tolerance if tolerance is None else tolerance
    values = [martin_kernel(x, theta.point(n), nu, group, method, radius=n + settings.martin_margin, **kwargs)
              for n in depths]
    deviations = [abs(b - a) for a, b in zip(values, values[1:])] or [0.0]
    value = values[-1]
    stabilized = deviations[-1] <= tolerance * max(1.0, abs(value))
    report = StabilizationReport(
        point=group.format_word(x),
        depths=list(depths),
        values=values,
        max_successive_deviation=max(deviations),
        final_deviation=deviations[-1],
        stabilized=stabilized,
    )
    logger.info("Boundary Martin kernel", x=group.format_word(x), theta=theta.description,
                value=value, final_deviation=deviations[-1], stabilized=stabilized)
    return value, report


def martin_kernel_at_boundary(x: Word, theta: BoundaryRay, nu: StepDistribution, group: GroupBackend,
                              depths: Sequence[int], method: GreenMethod = GreenMethod.LINEAR,
                              tolerance: Optional[float] = None, **kwargs) -> Tuple[float, StabilizationReport]:
    """K(x, theta(n)) over increasing depths; the value is the deepest one"""
    value, report = boundary_stabilization(x, theta, nu, group, depths, method, tolerance, **kwargs)
    if not report.stabilized:
        raise NotStabilized(f"K({group.format_word(x)}, {theta.description}) still moves by "
                            f"{report.final_deviation:.3e} at depth {depths[-1]}")
    return value, report


@dataclass(frozen=True)
class TreeMartin:
    solver: TreeDirichletSolver
    y: Word
    normaliser: float

    def __call__(self, x: Word) -> float:
        return self.solver.hit(x, self.y) / self.normaliser


def martin_function(target: Union[Word, BoundaryRay], nu: StepDistribution, group: GroupBackend,
                    depth: Optional[int] = None, radius: Optional[int] = None) -> TabulatedFunction:
    """
    x -> K_R(x, y) for y a word or the depth-th point of a ray, as a function
    on B(o, R + m1 - 1) with R = |y| + martin margin unless given.
    """
    if isinstance(target, BoundaryRay):
        if depth is None:
            raise PreconditionFailed("a depth is needed to read a Martin kernel off a ray")
        y = target.point(depth)
        name = f"martin({target.description},{depth})"
    else:
        y = target
        name = f"martin({group.format_word(y)})"
    radius = radius or len(y) + settings.martin_margin
    solver = cached_solver(group, nu, radius)
    if isinstance(solver, TreeDirichletSolver):
        normaliser = solver.hit((), y)
        if normaliser <= 0:
            raise DivisionUnstable(f"G(o,{group.format_word(y)}) vanishes at radius {radius}")
        return TabulatedFunction(group, solver.domain_radius, name,
                                 evaluator=TreeMartin(solver, y, normaliser), poles=(target,))
    green = solver.green(y)
    normaliser = green(())
    if normaliser <= 0:
        raise DivisionUnstable(f"G(o,{group.format_word(y)}) vanishes at radius {radius}")
    values = {x: v / normaliser for x, v in green.items()}
    return TabulatedFunction(group, solver.domain_radius, name, values=values, poles=(target,))
