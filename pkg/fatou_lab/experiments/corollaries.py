"""
Consequences of the escape bound: conditioned paths end their life inside the
tubes toward E, those tubes swallow the spikes of every tube at a point of E,
and non-tangential boundedness does not depend on the tube radius.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import structlog

from fatou_lab.boundary.rays import BoundaryRay
from fatou_lab.boundary.shadows import BoundaryRegion
from fatou_lab.boundary.tubes import TubeSpec, region_tube_verdict, spike, tube_points
from fatou_lab.conditioning.kernel import ConditionedKernel
from fatou_lab.conditioning.simulate import ConditionedSimulator, sample_boundary_points
from fatou_lab.config import settings
from fatou_lab.core.numbers import HalfInt
from fatou_lab.core.parallel import parallel_map
from fatou_lab.core.schemas import (
    CorollaryReport,
    NtStabilityReport,
    SpikeReport,
    TailInTubeReport,
    TubeVerdict,
)
from fatou_lab.experiments.nontangential import default_annuli, nt_report
from fatou_lab.groups.base import GroupBackend
from fatou_lab.potential.measure import poisson_integral
from fatou_lab.potential.tabulated import TabulatedFunction
from fatou_lab.walks.distribution import StepDistribution
from fatou_lab.walks.engine import ExitBall, Trajectory
from fatou_lab.walks.rng import Purpose
from fatou_lab.walks.batch import map_trajectories

logger = structlog.get_logger(__name__)

TAIL_THRESHOLD = 0.95
SUP_SLACK = 1e-9


def thetas_in_region(region: BoundaryRegion, nu: StepDistribution, group: GroupBackend, radius: int, n: int,
                     seed: int, delta_hat: HalfInt | int = 0, oversample: int = 4,
                     workers: Optional[int] = None) -> List[BoundaryRay]:
    """Up to n points of mu_o that land in E, from an oversampled draw"""
    thetas = sample_boundary_points((), nu, group, radius, oversample * n, seed, workers)
    kept = [t for t in thetas if region.contains(t, group, delta_hat=delta_hat)]
    if len(kept) < n:
        logger.warning("Few sampled points in the region", region=region.label(group), wanted=n, found=len(kept))
    return kept[:n]


# ========== TAILS IN TUBES ==========


@dataclass(frozen=True)
class _TailInside:
    region: BoundaryRegion
    c: HalfInt
    delta_hat: HalfInt
    group: GroupBackend

    def __call__(self, t: Trajectory) -> bool:
        tail = t.positions[-max(1, len(t.positions) // 3):]
        return all(region_tube_verdict(x, self.region, self.c, self.group, delta_hat=self.delta_hat) != TubeVerdict.OUT
                   for x in tail)


@dataclass(frozen=True)
class _TailShare:
    region: BoundaryRegion
    c: HalfInt
    nu: StepDistribution
    radius: int
    n_traj: int
    delta_hat: HalfInt
    seed: int

    def __call__(self, item: tuple) -> Tuple[int, int]:
        index, theta = item
        group = self.nu.group
        kernel = ConditionedKernel.toward(theta, self.nu, self.radius + settings.conditioning_depth_margin)
        inside = map_trajectories(ConditionedSimulator((), kernel, ExitBall(self.radius)), self.n_traj, self.seed,
                                  reducer=_TailInside(self.region, self.c, self.delta_hat, group),
                                  purpose=Purpose.CONDITIONED, start_index=index * self.n_traj, workers=1)
        return sum(inside), len(inside)


def tail_in_tube_check(region: BoundaryRegion, c: HalfInt | int, nu: StepDistribution, group: GroupBackend,
                       thetas: Sequence[BoundaryRay], radius: int, n_traj: int, seed: int,
                       delta_hat: HalfInt | int = 0, threshold: float = TAIL_THRESHOLD,
                       workers: Optional[int] = None) -> TailInTubeReport:
    """Share of conditioned paths toward theta in E whose last third stays in Gamma_c(E)"""
    c, delta_hat = HalfInt.of(c), HalfInt.of(delta_hat)
    counts = parallel_map(_TailShare(region, c, nu, radius, n_traj, delta_hat, seed),
                          list(enumerate(thetas)), workers)
    inside = sum(k for k, _ in counts)
    total = sum(n for _, n in counts)
    frequency = inside / total if total else 1.0
    logger.info("Tails in tubes", region=region.label(group), c=str(c), frequency=frequency, trajectories=total)
    return TailInTubeReport(thetas=[t.description for t in thetas], frequency=frequency, threshold=threshold,
                            passed=frequency >= threshold)


# ========== SPIKES ==========


def spike_radius(theta: BoundaryRay, e: HalfInt | int, region: BoundaryRegion, c: HalfInt | int,
                 max_radius: int, delta_hat: HalfInt | int = 0) -> Optional[int]:
    """
    Smallest R with Gamma_e^theta \\ B(o, R) inside Gamma_c(E), looking no
    further than max_radius; None when no such R shows up.
    """
    group = theta.group
    classified = tube_points(TubeSpec(theta, e), max_radius, delta_hat=delta_hat)
    points = classified.inside | classified.uncertain
    outside = {x for x in points if region_tube_verdict(x, region, c, group, delta_hat=delta_hat) != TubeVerdict.IN}
    for r in range(max_radius):
        if not spike(outside, r, group):
            return r
    return None


def spike_check(region: BoundaryRegion, c: HalfInt | int, thetas: Sequence[BoundaryRay],
                e_values: Sequence[HalfInt | int], max_radius: int,
                delta_hat: HalfInt | int = 0) -> List[SpikeReport]:
    reports = []
    for theta in thetas:
        radii = [spike_radius(theta, e, region, c, max_radius, delta_hat) for e in e_values]
        reports.append(SpikeReport(theta=theta.description, tube_radii=[float(HalfInt.of(e)) for e in e_values],
                                   spike_radius=radii, passed=all(r is not None for r in radii)))
    failed = sum(1 for r in reports if not r.passed)
    if failed:
        logger.warning("Spikes not contained within the search radius", failed=failed, max_radius=max_radius)
    return reports


# ========== TUBE RADIUS INDEPENDENCE ==========


def nt_stability_check(u: TabulatedFunction, thetas: Sequence[BoundaryRay], c_values: Sequence[HalfInt | int],
                       bound: float, annuli: Optional[Sequence[Tuple[int, int]]] = None, radius: int = 10,
                       delta_hat: HalfInt | int = 0) -> NtStabilityReport:
    """
    For theta where u stays below `bound` on the first tube, every other tested
    tube must also report u bounded. Censored verdicts are counted apart.
    """
    annuli = list(annuli or default_annuli(radius))
    c_values = [HalfInt.of(c) for c in c_values]
    bounded_at: Dict[str, int] = {str(c): 0 for c in c_values}
    consistent = censored = eligible = 0
    for theta in thetas:
        reports = [nt_report(u, TubeSpec(theta, c), annuli, delta_hat=delta_hat) for c in c_values]
        for c, report in zip(c_values, reports):
            if report.verdicts.bounded:
                bounded_at[str(c)] += 1
        first = reports[0]
        sups = [s for s in first.sup_per_annulus if s is not None]
        if not sups or max(sups) > bound + SUP_SLACK:
            continue
        eligible += 1
        if any(r.verdicts.censored for r in reports):
            censored += 1
        elif all(r.verdicts.bounded for r in reports):
            consistent += 1
    passed = consistent + censored == eligible
    logger.info("Tube radius independence", label=u.label, eligible=eligible, consistent=consistent,
                censored=censored, passed=passed)
    return NtStabilityReport(c_values=[float(c) for c in c_values], bounded_at=bounded_at,
                             consistent=consistent, censored=censored, passed=passed)


def corollary_checks(region: BoundaryRegion, c: HalfInt | int, nu: StepDistribution, group: GroupBackend,
                     radius: int, n_thetas: int, n_traj: int, seed: int,
                     u: Optional[TabulatedFunction] = None, bound: float = 1.0,
                     c_values: Sequence[HalfInt | int] = (1, 2, 3), e_values: Sequence[HalfInt | int] = (1, 2, 3),
                     delta_hat: HalfInt | int = 0, workers: Optional[int] = None) -> CorollaryReport:
    """The three sub-checks on one set of theta sampled from mu_o inside E; u defaults to f_E"""
    group.require_boundary("corollary_checks")
    thetas = thetas_in_region(region, nu, group, radius, n_thetas, seed, delta_hat, workers=workers)
    if u is None:
        u = poisson_integral(region, nu, group, radius + settings.martin_margin, delta_hat=float(HalfInt.of(delta_hat)))
    tails = tail_in_tube_check(region, c, nu, group, thetas, radius, n_traj, seed, delta_hat, workers=workers)
    spikes = spike_check(region, c, thetas, e_values, radius, delta_hat)
    stability = nt_stability_check(u, thetas, c_values, bound, radius=radius, delta_hat=delta_hat)
    passed = tails.passed and all(s.passed for s in spikes) and stability.passed
    return CorollaryReport(tail_in_tube=tails, spikes=spikes, nt_stability=stability, passed=passed)
