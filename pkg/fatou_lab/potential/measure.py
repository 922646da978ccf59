"""
Harmonic measure (exit law) estimates and Poisson integrals of boundary regions.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from fatou_lab.boundary.shadows import BoundaryRegion, Shadow
from fatou_lab.core.exceptions import PreconditionFailed
from fatou_lab.core.schemas import GreenMethod, HarmonicBin, HarmonicMeasureEstimate
from fatou_lab.geometry.metric import ball, geodesic
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.potential.solvers import cached_solver
from fatou_lab.potential.tabulated import TabulatedFunction
from fatou_lab.walks.batch import PlainSimulator, map_trajectories
from fatou_lab.walks.distribution import StepDistribution
from fatou_lab.walks.engine import ExitBall, Trajectory, exit_proxy

logger = structlog.get_logger(__name__)

OUTSIDE_BIN = "outside"


@dataclass(frozen=True)
class SphereCell:
    """Bin exit points by where geodesic(o, exit) crosses the level-t sphere"""
    level: int


@dataclass(frozen=True)
class ShadowBins:
    """Bin exit points by the first listed shadow containing them"""
    shadows: Tuple[Shadow, ...]
    delta_hat: float = 0.0


Binning = Union[SphereCell, ShadowBins]


@dataclass(frozen=True)
class ExitCell:
    radius: int
    level: int
    group: GroupBackend

    def __call__(self, t: Trajectory) -> Word:
        proxy = exit_proxy(t, self.radius)
        return geodesic((), proxy, self.group).vertices[self.level]


@dataclass(frozen=True)
class ExitShadow:
    radius: int
    binning: ShadowBins
    group: GroupBackend

    def __call__(self, t: Trajectory) -> int:
        proxy = exit_proxy(t, self.radius)
        for i, s in enumerate(self.binning.shadows):
            if BoundaryRegion((s,)).contains(proxy, self.group, delta_hat=self.binning.delta_hat):
                return i
        return -1


@dataclass(frozen=True)
class ExitInRegion:
    radius: int
    region: BoundaryRegion
    group: GroupBackend
    delta_hat: float = 0.0

    def __call__(self, t: Trajectory) -> int:
        return int(self.region.contains(exit_proxy(t, self.radius), self.group, delta_hat=self.delta_hat))


def harmonic_measure(z: Word, nu: StepDistribution, group: GroupBackend, radius: int, binning: Binning,
                     n_traj: int, seed: int, workers: Optional[int] = None,
                     start_index: int = 0) -> HarmonicMeasureEstimate:
    """Empirical exit law at radius R from z, binned by sphere cells or shadows"""
    group.require_boundary("harmonic_measure")
    simulator = PlainSimulator(z, nu, group, ExitBall(radius))
    bins: Dict[str, HarmonicBin] = {}
    if isinstance(binning, SphereCell):
        if binning.level > radius:
            raise PreconditionFailed(f"cell level {binning.level} exceeds the exit radius {radius}")
        cells = map_trajectories(simulator, n_traj, seed, reducer=ExitCell(radius, binning.level, group),
                                 start_index=start_index, workers=workers)
        counts = Counter(cells)
        for cell in sorted(counts, key=lambda c: (len(c), c)):
            label = group.format_word(cell)
            bins[label] = HarmonicBin(label=label, cell=cell, count=counts[cell],
                                      probability=counts[cell] / n_traj)
        level = binning.level
    else:
        hits = map_trajectories(simulator, n_traj, seed, reducer=ExitShadow(radius, binning, group),
                                start_index=start_index, workers=workers)
        counts = Counter(hits)
        for i, s in enumerate(binning.shadows):
            label = s.label(group)
            bins[label] = HarmonicBin(label=label, count=counts[i], probability=counts[i] / n_traj)
        if counts[-1]:
            bins[OUTSIDE_BIN] = HarmonicBin(label=OUTSIDE_BIN, count=counts[-1], probability=counts[-1] / n_traj)
        level = None
    logger.info("Harmonic measure sampled", z=group.format_word(z), radius=radius, bins=len(bins), n_traj=n_traj)
    return HarmonicMeasureEstimate(z=group.format_word(z), radius=radius, level=level, bins=bins,
                                   n_traj=n_traj, seed=seed)


def exit_frequency(x: Word, region: BoundaryRegion, nu: StepDistribution, group: GroupBackend, radius: int,
                   n_traj: int, seed: int, workers: Optional[int] = None, start_index: int = 0,
                   delta_hat: float = 0.0) -> Tuple[float, float]:
    """P_x(exit proxy in region) and its binomial standard error"""
    hits = map_trajectories(PlainSimulator(x, nu, group, ExitBall(radius)), n_traj, seed,
                            reducer=ExitInRegion(radius, region, group, delta_hat),
                            start_index=start_index, workers=workers)
    p = float(np.mean(hits))
    return p, float(np.sqrt(p * (1 - p) / n_traj))


def poisson_integral(region: BoundaryRegion, nu: StepDistribution, group: GroupBackend, radius: int,
                     method: GreenMethod = GreenMethod.LINEAR, points: Optional[Sequence[Word]] = None,
                     n_traj: int = 10_000, seed: int = 0, workers: Optional[int] = None,
                     delta_hat: float = 0.0) -> TabulatedFunction:
    """
    f_E(x) = P_x(exit proxy at R lies in E).

    The linear method solves the Dirichlet problem on B(o, R) with data 1_E on
    the sphere; the Monte-Carlo method tabulates the given points (default B(o, 1)).
    """
    group.require_boundary("poisson_integral")
    if method == GreenMethod.LINEAR:
        return cached_solver(group, nu, radius).exit_probability(region, delta_hat)

    points = list(points) if points is not None else list(ball(group, 1))
    values: Dict[Word, float] = {}
    for i, x in enumerate(points):
        values[x], _ = exit_frequency(x, region, nu, group, radius, n_traj, seed, workers,
                                      start_index=i * n_traj, delta_hat=delta_hat)
    domain = max(len(x) for x in points)
    return TabulatedFunction(group, domain, f"poisson_mc({region.label(group)},{radius})", values=values)
