"""
Conditioned simulation, frozen-ray sampling of boundary points, and the
desintegration check E_z[F] = int E_z^theta[F] d mu_z(theta).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np
import structlog

from fatou_lab.boundary.rays import BoundaryRay, frozen_ray
from fatou_lab.config import settings
from fatou_lab.core.constants import SIGMA_MULTIPLIER
from fatou_lab.core.parallel import parallel_map
from fatou_lab.core.schemas import DesintegrationReport
from fatou_lab.conditioning.kernel import ConditionedKernel
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.walks.batch import PlainSimulator, map_trajectories
from fatou_lab.walks.distribution import StepDistribution
from fatou_lab.walks.engine import ExitBall, FirstOf, FixedSteps, StopRule, Trajectory, exit_proxy, run
from fatou_lab.walks.rng import Purpose, RngStream, UniformFeed

logger = structlog.get_logger(__name__)


def simulate_conditioned(z: Word, k: ConditionedKernel, stop: StopRule,
                         rng: Union[RngStream, np.random.Generator], step_cap: Optional[int] = None) -> Trajectory:
    """A trajectory under p^h; leaving h's domain raises OutOfTabulatedRange"""
    generator = rng.generator() if isinstance(rng, RngStream) else rng
    feed = UniformFeed(generator)
    worst = 0.0

    def next_point(x: Word, _n: int) -> Word:
        nonlocal worst
        y, defect = k.draw(x, feed.next())
        worst = max(worst, defect)
        return y

    positions = run(z, k.group, stop, next_point, step_cap)
    seed = rng.describe() if isinstance(rng, RngStream) else {}
    return Trajectory(start=z, positions=positions, seed=seed,
                      conditioned={"theta": k.target_label, "depth": k.depth, "renorm_defect": worst})


@dataclass(frozen=True)
class ConditionedSimulator:
    z: Word
    kernel: ConditionedKernel
    stop: StopRule
    step_cap: Optional[int] = None

    def __call__(self, stream: RngStream) -> Trajectory:
        return simulate_conditioned(self.z, self.kernel, self.stop, stream, self.step_cap)


@dataclass(frozen=True)
class ExitPoint:
    radius: int

    def __call__(self, t: Trajectory) -> tuple:
        return exit_proxy(t, self.radius), t.seed


def sample_boundary_points(z: Word, nu: StepDistribution, group: GroupBackend, radius: int, n: int,
                           seed: int, workers: Optional[int] = None, start_index: int = 0) -> List[BoundaryRay]:
    """Frozen rays toward exit points at radius R, i.e. samples of mu_z"""
    group.require_boundary("sample_boundary_points")
    exits = map_trajectories(PlainSimulator(z, nu, group, ExitBall(radius)), n, seed,
                             reducer=ExitPoint(radius), purpose=Purpose.THETA,
                             start_index=start_index, workers=workers)
    return [frozen_ray(group, point, seed=stream) for point, stream in exits]


# ========== TRAJECTORY FUNCTIONALS ==========


@dataclass(frozen=True)
class ConstantOne:
    horizon: int = 0

    @property
    def label(self) -> str:
        return "one"

    def __call__(self, t: Trajectory) -> float:
        return 1.0


@dataclass(frozen=True)
class ReturnIndicator:
    """1{X_n = w}; zero when the walk was stopped before time n"""
    n: int
    w: Word = ()
    name: str = "e"

    @property
    def horizon(self) -> int:
        return self.n

    @property
    def label(self) -> str:
        return f"1{{X_{self.n}={self.name}}}"

    def __call__(self, t: Trajectory) -> float:
        return 1.0 if len(t.positions) > self.n and t.positions[self.n] == self.w else 0.0


@dataclass(frozen=True)
class CappedVisits:
    """min(visits to w up to the horizon, cap)"""
    w: Word
    cap: int
    horizon: int = 50
    name: str = "e"

    @property
    def label(self) -> str:
        return f"min(visits({self.name}),{self.cap})"

    def __call__(self, t: Trajectory) -> float:
        visits = sum(1 for x in t.positions[: self.horizon + 1] if x == self.w)
        return float(min(visits, self.cap))


Functional = Union[ConstantOne, ReturnIndicator, CappedVisits]


@dataclass(frozen=True)
class _Evaluate:
    functional: Functional

    def __call__(self, t: Trajectory) -> tuple:
        defect = t.conditioned["renorm_defect"] if t.conditioned else 0.0
        return self.functional(t), defect


@dataclass(frozen=True)
class _InnerAverage:
    """Conditioned mean of F given one sampled boundary point"""
    z: Word
    nu: StepDistribution
    stop: StopRule
    functional: Functional
    depth: int
    n_inner: int
    seed: int

    def __call__(self, item: tuple) -> tuple:
        index, theta = item
        kernel = ConditionedKernel.toward(theta, self.nu, self.depth)
        values = map_trajectories(ConditionedSimulator(self.z, kernel, self.stop), self.n_inner, self.seed,
                                  reducer=_Evaluate(self.functional), purpose=Purpose.CONDITIONED,
                                  start_index=index * self.n_inner, workers=1)
        samples = np.array([v for v, _ in values])
        return float(samples.mean()), max(d for _, d in values)


def desintegration_check(functional: Functional, z: Word, nu: StepDistribution, group: GroupBackend,
                         radius: int, n_outer: int, n_inner: int, seed: int,
                         workers: Optional[int] = None, sigmas: float = SIGMA_MULTIPLIER) -> DesintegrationReport:
    """
    Left: plain Monte-Carlo of E_z[F]. Right: E_z^theta[F] averaged over frozen
    rays theta ~ mu_z drawn from an independent stream. Both sides run the
    walk until the horizon of F or the exit from B(o, R), whichever comes first.
    """
    group.require_boundary("desintegration_check")
    stop = FirstOf((FixedSteps(max(functional.horizon, 1)), ExitBall(radius)))
    depth = radius + settings.conditioning_depth_margin

    left_values = np.array(
        map_trajectories(PlainSimulator(z, nu, group, stop), n_outer * n_inner, seed,
                         reducer=functional, purpose=Purpose.PLAIN, workers=workers),
        dtype=float,
    )
    left = float(left_values.mean())
    left_stderr = float(left_values.std(ddof=1) / np.sqrt(len(left_values))) if len(left_values) > 1 else 0.0

    thetas = sample_boundary_points(z, nu, group, radius, n_outer, seed, workers)
    inner = parallel_map(_InnerAverage(z, nu, stop, functional, depth, n_inner, seed),
                         list(enumerate(thetas)), workers)
    means = np.array([m for m, _ in inner])
    right = float(means.mean())
    right_stderr = float(means.std(ddof=1) / np.sqrt(n_outer)) if n_outer > 1 else 0.0
    max_defect = max((d for _, d in inner), default=0.0)

    spread = float(np.hypot(left_stderr, right_stderr))
    gap = abs(left - right)
    z_score = gap / spread if spread > 0 else (0.0 if gap < 1e-12 else float("inf"))
    passed = z_score <= sigmas
    logger.info("Desintegration check", functional=functional.label, left=left, right=right,
                z_score=z_score, max_renorm_defect=max_defect, passed=passed)
    return DesintegrationReport(
        functional=functional.label,
        left=left,
        left_stderr=left_stderr,
        right=right,
        right_stderr=right_stderr,
        z_score=z_score,
        n_outer=n_outer,
        n_inner=n_inner,
        max_renorm_defect=max_defect,
        passed=passed,
    )
