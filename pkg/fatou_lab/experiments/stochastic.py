"""
Stochastic boundedness and convergence along conditioned trajectories, the
stopped-martingale bound, and the bounded-implies-convergent frequency.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import structlog

from fatou_lab.boundary.shadows import BoundaryRegion
from fatou_lab.boundary.tubes import TubeSpec
from fatou_lab.config import settings
from fatou_lab.conditioning.kernel import ConditionedKernel
from fatou_lab.conditioning.simulate import ConditionedSimulator, sample_boundary_points
from fatou_lab.core.constants import CONVERGENCE_RATIO, INFINITY, SATURATION_RATIO
from fatou_lab.core.exceptions import OutOfTabulatedRange
from fatou_lab.core.numbers import HalfInt
from fatou_lab.core.parallel import parallel_map
from fatou_lab.core.schemas import Lemma53Report, Prop52Report, StochasticReport, StoppedMartingaleReport
from fatou_lab.experiments.nontangential import default_annuli, nt_report
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.potential.measure import poisson_integral
from fatou_lab.potential.tabulated import TabulatedFunction
from fatou_lab.walks.batch import PlainSimulator, map_trajectories
from fatou_lab.walks.distribution import StepDistribution
from fatou_lab.walks.engine import ExitBall, Trajectory, stopping_time_Tm, thickened_sup
from fatou_lab.walks.rng import Purpose

logger = structlog.get_logger(__name__)

LIMIT_TOLERANCE = 0.05


@dataclass(frozen=True)
class PathSummary:
    sup_thickened: float
    sup_path: float
    tail_osc: float
    limit: float
    bounded: bool
    convergent: bool
    renorm_defect: float


@dataclass(frozen=True)
class _Summarise:
    u: TabulatedFunction
    m1: int
    window: int
    group: GroupBackend

    def __call__(self, t: Trajectory) -> Optional[PathSummary]:
        try:
            cache: dict = {}
            thick = [thickened_sup(self.u, x, self.m1, self.group, cache) for x in t.positions]
            values = [self.u(x) for x in t.positions]
        except OutOfTabulatedRange:
            return None
        tail = values[-self.window:]
        limit = (max(tail) + min(tail)) / 2
        osc = max(tail) - min(tail)
        convergent = osc <= CONVERGENCE_RATIO * (1 + abs(limit))
        split = max(1, len(thick) - self.window)
        early, late = max(thick[:split]), max(thick[split:] or thick[-1:])
        bounded = convergent or late - early <= SATURATION_RATIO * (1 + abs(late))
        defect = t.conditioned["renorm_defect"] if t.conditioned else 0.0
        return PathSummary(max(thick), max(abs(v) for v in values), osc, limit, bounded, convergent, defect)


def trajectory_summaries(u: TabulatedFunction, k: ConditionedKernel, z: Word, radius: int, n_traj: int,
                         window: int, seed: int, start_index: int = 0,
                         workers: Optional[int] = None) -> List[Optional[PathSummary]]:
    return map_trajectories(ConditionedSimulator(z, k, ExitBall(radius)), n_traj, seed,
                            reducer=_Summarise(u, k.m1, window, k.group), purpose=Purpose.CONDITIONED,
                            start_index=start_index, workers=workers)


def stochastic_report(u: TabulatedFunction, k: ConditionedKernel, n_traj: int, window: int, radius: int,
                      seed: int, z: Word = (), start_index: int = 0,
                      workers: Optional[int] = None) -> StochasticReport:
    """
    Per conditioned trajectory: the sup of |u| over the m1-thickened path, and
    the oscillation of u(X_n) over its last `window` steps before leaving B(o, R).
    Trajectories whose thickening leaves u's domain are censored.
    """
    summaries = trajectory_summaries(u, k, z, radius, n_traj, window, seed, start_index, workers)
    kept = [s for s in summaries if s is not None]
    censored = len(summaries) - len(kept)
    if censored:
        logger.warning("Trajectories censored outside the tabulated range", label=u.label, censored=censored)
    count = max(len(kept), 1)
    report = StochasticReport(
        theta=k.target_label,
        n_traj=n_traj,
        window=window,
        sup_thickened=[s.sup_thickened for s in kept],
        sup_path=[s.sup_path for s in kept],
        tail_osc=[s.tail_osc for s in kept],
        limits=[s.limit for s in kept],
        bounded=[s.bounded for s in kept],
        convergent=[s.convergent for s in kept],
        censored=censored,
        fraction_bounded=sum(s.bounded for s in kept) / count,
        fraction_convergent=sum(s.convergent for s in kept) / count,
        max_renorm_defect=max((s.renorm_defect for s in kept), default=0.0),
    )
    logger.info("Stochastic report", theta=report.theta, label=u.label, bounded=report.fraction_bounded,
                convergent=report.fraction_convergent, censored=censored)
    return report


# ========== STOPPED MARTINGALE ==========


@dataclass(frozen=True)
class _StoppedRatio:
    u: TabulatedFunction
    m: float
    m1: int
    group: GroupBackend

    def __call__(self, t: Trajectory) -> tuple:
        stop = stopping_time_Tm(t, self.u, self.m, self.m1, self.group)
        last = t.steps if stop == INFINITY else stop
        bound = max(self.m, abs(self.u(t.start)))
        worst = max(abs(self.u(x)) for x in t.positions[: last + 1])
        return stop != INFINITY, worst / bound if bound > 0 else (0.0 if worst == 0 else float("inf"))


def stopped_martingale_check(u: TabulatedFunction, m: float, nu: StepDistribution, group: GroupBackend,
                             n_traj: int, radius: int, seed: int, z: Word = (),
                             workers: Optional[int] = None) -> StoppedMartingaleReport:
    """|u(X_{n ^ T_m})| <= max(m, |u(X_0)|) on every trajectory, exactly"""
    results = map_trajectories(PlainSimulator(z, nu, group, ExitBall(radius)), n_traj, seed,
                               reducer=_StoppedRatio(u, m, nu.m1, group), workers=workers)
    violations = sum(1 for _, ratio in results if ratio > 1.0)
    max_ratio = max(ratio for _, ratio in results)
    report = StoppedMartingaleReport(m=m, n_traj=n_traj, stopped=sum(1 for s, _ in results if s),
                                     violations=violations, max_ratio=max_ratio, passed=violations == 0)
    logger.info("Stopped martingale bound", label=u.label, m=m, stopped=report.stopped,
                violations=violations, max_ratio=max_ratio)
    return report


# ========== BOUNDED => CONVERGENT ==========


@dataclass(frozen=True)
class _ThetaStochastic:
    u: TabulatedFunction
    nu: StepDistribution
    radius: int
    depth: int
    n_traj: int
    window: int
    seed: int

    def __call__(self, item: tuple) -> List[Optional[PathSummary]]:
        index, theta = item
        kernel = ConditionedKernel.toward(theta, self.nu, self.depth)
        return trajectory_summaries(self.u, kernel, (), self.radius, self.n_traj, self.window, self.seed,
                                    start_index=index * self.n_traj, workers=1)


def prop52_check(u: TabulatedFunction, nu: StepDistribution, group: GroupBackend, bound: float,
                 n_thetas: int, n_traj: int, radius: int, seed: int, window: int = 5,
                 bounded_share: float = 0.99, convergent_share: float = 0.95,
                 workers: Optional[int] = None) -> Prop52Report:
    """
    Among sampled theta whose conditioned paths keep the thickened sup below
    `bound` on at least `bounded_share` of trajectories, the share of theta
    with convergent paths should be at least `convergent_share`.
    """
    thetas = sample_boundary_points((), nu, group, radius, n_thetas, seed, workers)
    depth = radius + settings.conditioning_depth_margin
    per_theta = parallel_map(_ThetaStochastic(u, nu, radius, depth, n_traj, window, seed),
                             list(enumerate(thetas)), workers)
    bounded_thetas = 0
    convergent = 0
    for summaries in per_theta:
        kept = [s for s in summaries if s is not None]
        if not kept:
            continue
        if sum(s.sup_thickened <= bound for s in kept) / len(kept) >= bounded_share:
            bounded_thetas += 1
            if sum(s.convergent for s in kept) / len(kept) >= convergent_share:
                convergent += 1
    fraction = convergent / bounded_thetas if bounded_thetas else 1.0
    logger.info("Bounded-implies-convergent frequency", label=u.label, bounded_thetas=bounded_thetas,
                convergent=convergent, fraction=fraction)
    return Prop52Report(bound=bound, thetas=[t.description for t in thetas], bounded_thetas=bounded_thetas,
                        convergent_among_bounded=convergent, fraction=fraction,
                        passed=fraction >= convergent_share)


# ========== POISSON REPRESENTATION ==========


def lemma53_check(region: BoundaryRegion, nu: StepDistribution, group: GroupBackend, n_thetas: int,
                  c: HalfInt | int, radius: int, n_traj: int, seed: int, delta_hat: HalfInt | int = 0,
                  tolerance: float = LIMIT_TOLERANCE, window: int = 5,
                  workers: Optional[int] = None) -> Lemma53Report:
    """
    For u = f_E, the non-tangential limit along the tube and the stochastic
    limit along conditioned paths should both equal 1_E(theta).
    """
    u = poisson_integral(region, nu, group, radius + settings.martin_margin, delta_hat=float(delta_hat))
    thetas = sample_boundary_points((), nu, group, radius, n_thetas, seed, workers)
    depth = radius + settings.conditioning_depth_margin
    annuli = default_annuli(radius)
    per_theta = parallel_map(_ThetaStochastic(u, nu, radius, depth, n_traj, window, seed),
                             list(enumerate(thetas)), workers)

    in_region: List[bool] = []
    nt_limits: List[Optional[float]] = []
    stochastic_limits: List[Optional[float]] = []
    agree = 0
    for theta, summaries in zip(thetas, per_theta):
        target = 1.0 if region.contains(theta, group, delta_hat=delta_hat) else 0.0
        in_region.append(bool(target))
        nt = nt_report(u, TubeSpec(theta, c), annuli, delta_hat=delta_hat)
        nt_limits.append(nt.verdicts.limit)
        kept = [s for s in summaries if s is not None]
        stochastic = float(np.mean([s.limit for s in kept])) if kept else None
        stochastic_limits.append(stochastic)
        if (nt.verdicts.limit is not None and stochastic is not None
                and abs(nt.verdicts.limit - target) <= tolerance and abs(stochastic - target) <= tolerance):
            agree += 1
    agreement = agree / len(thetas) if thetas else 1.0
    logger.info("Poisson representation limits", region=region.label(group), agreement=agreement)
    return Lemma53Report(region=region.label(group), thetas=[t.description for t in thetas],
                         in_region=in_region, nt_limits=nt_limits, stochastic_limits=stochastic_limits,
                         agreement=agreement, tolerance=tolerance, passed=agreement >= 0.95)
