"""
Strong-Markov bound at the exit of the tubes toward E:

    P_z(X_inf not in E) >= eta * P_z(tau < inf)

with tau the first exit from Gamma = Gamma_{c - m1}(E), checked jointly on one
sample per start point, plus the decay of P_z(tau < inf) as z runs down a
tube toward a point of E.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from fatou_lab.boundary.shadows import BoundaryRegion
from fatou_lab.boundary.tubes import region_tube_verdict
from fatou_lab.core.constants import SIGMA_MULTIPLIER
from fatou_lab.core.exceptions import PreconditionFailed
from fatou_lab.core.numbers import HalfInt
from fatou_lab.core.schemas import EtaBoundReport, TubeVerdict
from fatou_lab.experiments.corollaries import thetas_in_region
from fatou_lab.experiments.lemmas import lemma62_check
from fatou_lab.geometry.metric import ball
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.walks.batch import PlainSimulator, map_trajectories
from fatou_lab.walks.distribution import StepDistribution
from fatou_lab.walks.engine import ExitBall, Trajectory, exit_index

logger = structlog.get_logger(__name__)

TREND_DEPTHS = (3, 6, 9)


@dataclass(frozen=True)
class _EscapeAndExit:
    region: BoundaryRegion
    gamma: HalfInt
    radius: int
    delta_hat: HalfInt
    group: GroupBackend

    def __call__(self, t: Trajectory) -> Tuple[bool, bool]:
        last = exit_index(t, self.radius)
        left_gamma = any(region_tube_verdict(x, self.region, self.gamma, self.group, delta_hat=self.delta_hat)
                         == TubeVerdict.OUT for x in t.positions[: last + 1])
        outside = not self.region.contains(t.positions[last], self.group, delta_hat=self.delta_hat)
        return outside, left_gamma


def _joint(z: Word, probe: _EscapeAndExit, nu: StepDistribution, n_traj: int, seed: int, start_index: int,
           workers: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
    rows = map_trajectories(PlainSimulator(z, nu, probe.group, ExitBall(probe.radius)), n_traj, seed,
                            reducer=probe, start_index=start_index, workers=workers)
    outside = np.array([o for o, _ in rows], dtype=float)
    escaped = np.array([e for _, e in rows], dtype=float)
    return outside, escaped


def _margin_z(outside: np.ndarray, escaped: np.ndarray, eta: float) -> float:
    d = outside - eta * escaped
    mean = float(d.mean())
    stderr = float(d.std(ddof=1) / math.sqrt(len(d))) if len(d) > 1 else 0.0
    if stderr > 0:
        return mean / stderr
    return math.inf if mean >= 0 else -math.inf


def gamma_points(region: BoundaryRegion, gamma: HalfInt, group: GroupBackend, radius: int, limit: int,
                 delta_hat: HalfInt) -> List[Word]:
    found: List[Word] = []
    for x in ball(group, radius):
        if region_tube_verdict(x, region, gamma, group, delta_hat=delta_hat) == TubeVerdict.IN:
            found.append(x)
            if len(found) == limit:
                break
    return found


def eta_tau_bound_check(region: BoundaryRegion, c: HalfInt | int, nu: StepDistribution, group: GroupBackend,
                        radius: int, n_traj: int, seed: int, delta_hat: HalfInt | int = 0,
                        eta_hat: Optional[float] = None, points: Optional[Sequence[Word]] = None,
                        n_points: int = 10, point_radius: int = 4,
                        trend_depths: Sequence[int] = TREND_DEPTHS, sigmas: float = SIGMA_MULTIPLIER,
                        workers: Optional[int] = None) -> EtaBoundReport:
    group.require_boundary("eta_tau_bound_check")
    c, delta_hat = HalfInt.of(c), HalfInt.of(delta_hat)
    gamma = c - nu.m1
    if gamma <= 0:
        raise PreconditionFailed(f"tube radius {c} leaves no room for the jump range {nu.m1}")

    if eta_hat is None:
        if region.is_full:
            eta_hat = 0.0
        else:
            lemma = lemma62_check(region, gamma, nu, group, n_traj, radius, seed, delta_hat, workers=workers)
            eta_hat = max(0.0, lemma.eta_hat - sigmas * lemma.eta_sigma)

    probe = _EscapeAndExit(region, gamma, radius, delta_hat, group)
    points = list(points) if points is not None else gamma_points(region, gamma, group, point_radius, n_points,
                                                                  delta_hat)
    p_not_in_e: List[float] = []
    p_tau: List[float] = []
    margins: List[float] = []
    for i, z in enumerate(points):
        outside, escaped = _joint(z, probe, nu, n_traj, seed, i * n_traj, workers)
        p_not_in_e.append(float(outside.mean()))
        p_tau.append(float(escaped.mean()))
        margins.append(_margin_z(outside, escaped, eta_hat))
    min_margin_z = min(margins, default=math.inf)

    trend_p: List[float] = []
    trend_ok = True
    depths = [d for d in trend_depths if d < radius]
    thetas = [] if region.is_full or not region.shadows else thetas_in_region(region, nu, group, radius, 1, seed,
                                                                               delta_hat, workers=workers)
    if thetas and depths:
        theta = thetas[0]
        offset = len(points) * n_traj
        stderrs = []
        for j, d in enumerate(depths):
            _, escaped = _joint(theta.point(d), probe, nu, n_traj, seed, offset + j * n_traj, workers)
            p = float(escaped.mean())
            trend_p.append(p)
            stderrs.append(math.sqrt(p * (1 - p) / n_traj))
        trend_ok = all(trend_p[j + 1] <= trend_p[j] + sigmas * math.hypot(stderrs[j], stderrs[j + 1])
                       for j in range(len(trend_p) - 1))
    else:
        depths = []

    passed = min_margin_z >= -sigmas and trend_ok
    logger.info("Escape bound at the tube exit", region=region.label(group), c=str(c), eta_hat=eta_hat,
                points=len(points), min_margin_z=min_margin_z, trend=trend_p, passed=passed)
    return EtaBoundReport(eta_hat=eta_hat, points=[group.format_word(z) for z in points], p_not_in_e=p_not_in_e,
                          p_tau_finite=p_tau, min_margin_z=min_margin_z, trend_depths=depths,
                          trend_p_tau=trend_p, trend_ok=trend_ok, passed=passed)
