"""
Harmonic-measure lower bounds: the mass of boundary neighbourhoods seen from
any base point, and the chance of escaping a region from outside its tubes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from fatou_lab.boundary.rays import BoundaryRay, translate_ray
from fatou_lab.boundary.shadows import BoundaryRegion, gromov_product_to_ray
from fatou_lab.boundary.tubes import region_tube_verdict
from fatou_lab.conditioning.simulate import sample_boundary_points
from fatou_lab.config import SolverChoice
from fatou_lab.core.constants import SIGMA_MULTIPLIER
from fatou_lab.core.exceptions import PreconditionFailed
from fatou_lab.core.numbers import HalfInt
from fatou_lab.core.schemas import Lemma61Report, Lemma62Report, TubeVerdict
from fatou_lab.geometry.metric import ball
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.potential.measure import exit_frequency
from fatou_lab.potential.solvers import cached_solver
from fatou_lab.walks.batch import PlainSimulator, map_trajectories
from fatou_lab.walks.distribution import StepDistribution
from fatou_lab.walks.engine import ExitBall, Trajectory, exit_proxy

logger = structlog.get_logger(__name__)

TRANSLATION_PAIRS = 3


def _is_free_srw(group: GroupBackend, nu: StepDistribution) -> bool:
    return group.is_tree and getattr(group, "rank", None) == 2 and nu.symmetric and nu.m1 == 1 and nu.stay == 0


def free_srw_bound(alpha: float) -> float:
    """Lower bound on mu_x(W_alpha(theta)) for the simple walk on the free group of rank 2"""
    if alpha <= 0:
        return 1.0
    return 0.25 * (1 / 3) ** math.ceil(alpha)


@dataclass(frozen=True)
class _ExitPoint:
    radius: int

    def __call__(self, t: Trajectory) -> Word:
        return exit_proxy(t, self.radius)


def _exits(x: Word, nu: StepDistribution, group: GroupBackend, radius: int, n_traj: int, seed: int,
           start_index: int, workers: Optional[int]) -> List[Word]:
    return map_trajectories(PlainSimulator(x, nu, group, ExitBall(radius)), n_traj, seed,
                            reducer=_ExitPoint(radius), start_index=start_index, workers=workers)


def _mass(exits: Sequence[Word], theta: BoundaryRay, alpha: float, base: Word) -> Tuple[float, float]:
    """Share of exit points xi with (xi, theta)_base >= alpha, with its standard error"""
    hits = np.array([gromov_product_to_ray(xi, theta, o=base) >= alpha for xi in exits], dtype=float)
    p = float(hits.mean())
    return p, float(np.sqrt(p * (1 - p) / len(hits)))


def lemma61_check(nu: StepDistribution, group: GroupBackend, alpha: float, n_traj: int, radius: int, seed: int,
                  points: Optional[Sequence[Word]] = None, n_rays: int = 20, oracle: Optional[float] = None,
                  sigmas: float = SIGMA_MULTIPLIER, workers: Optional[int] = None) -> Lemma61Report:
    """
    min over base points x and rays theta of mu_x{xi : (xi, theta)_x >= alpha},
    estimated from one exit sample per x. The translated comparison
    mu_x(W(theta)) ~ mu_o(W(x^-1 theta)) runs on the first few pairs.
    """
    group.require_boundary("lemma61_check")
    points = list(points) if points is not None else list(ball(group, 3))
    if any(len(x) >= radius for x in points):
        raise PreconditionFailed(f"base points must lie inside B(o, {radius})")
    rays = sample_boundary_points((), nu, group, radius, n_rays, seed, workers)
    if oracle is None and _is_free_srw(group, nu):
        oracle = free_srw_bound(alpha)

    minimum, minimum_sigma, argmin = math.inf, 0.0, ("", "")
    samples = {}
    for i, x in enumerate(points):
        exits = _exits(x, nu, group, radius, n_traj, seed, (i + 1) * n_traj, workers)
        samples[x] = exits
        for theta in rays:
            p, sigma = _mass(exits, theta, alpha, x)
            if p < minimum:
                minimum, minimum_sigma, argmin = p, sigma, (group.format_word(x), theta.description)

    translation_max_z: Optional[float] = None
    origin = _exits((), nu, group, radius, n_traj, seed, 0, workers)
    movable = [x for x in points if x]
    for x, theta in list(zip(movable, rays))[:TRANSLATION_PAIRS]:
        p, s = _mass(samples[x], theta, alpha, x)
        q, t = _mass(origin, translate_ray(theta, group.inverse(x)), alpha, ())
        spread = math.hypot(s, t)
        z = abs(p - q) / spread if spread > 0 else (0.0 if p == q else math.inf)
        translation_max_z = z if translation_max_z is None else max(translation_max_z, z)

    bound = oracle if oracle is not None else 0.0
    passed = minimum + sigmas * minimum_sigma >= bound and minimum > 0
    if translation_max_z is not None:
        passed = passed and translation_max_z <= sigmas
    logger.info("Boundary neighbourhood mass", alpha=alpha, minimum=minimum, oracle=oracle,
                translation_max_z=translation_max_z, passed=passed)
    return Lemma61Report(alpha=alpha, oracle_bound=bound, minimum=minimum, minimum_sigma=minimum_sigma,
                         argmin=argmin, pairs=len(points) * len(rays), translation_max_z=translation_max_z,
                         passed=passed)


def out_of_tube_points(region: BoundaryRegion, c: HalfInt | int, group: GroupBackend, radius: int,
                       limit: int, delta_hat: HalfInt | int = 0) -> List[Word]:
    """The first `limit` points of B(o, radius), in ball order, certainly outside Gamma_c(E)"""
    found: List[Word] = []
    for x in ball(group, radius):
        if region_tube_verdict(x, region, c, group, delta_hat=delta_hat) == TubeVerdict.OUT:
            found.append(x)
            if len(found) == limit:
                break
    return found


def lemma62_check(region: BoundaryRegion, c: HalfInt | int, nu: StepDistribution, group: GroupBackend,
                  n_traj: int, radius: int, seed: int, delta_hat: HalfInt | int = 0,
                  points: Optional[Sequence[Word]] = None, n_points: int = 50, point_radius: int = 5,
                  lower_bound: Optional[float] = None, sigmas: float = SIGMA_MULTIPLIER,
                  workers: Optional[int] = None) -> Lemma62Report:
    """
    P_x(exit outside E) for x outside the tubes toward E. The empirical eta is
    the smallest of these; it must stay positive and above `lower_bound`
    within `sigmas` standard errors.

    Without an explicit bound, the simple walk on the free group of rank 2 is
    held to the exact smallest escape probability over the same points.
    """
    group.require_boundary("lemma62_check")
    c, delta_hat = HalfInt.of(c), HalfInt.of(delta_hat)
    if c <= delta_hat * 10:
        raise PreconditionFailed(f"tube radius {c} must exceed 10 delta = {delta_hat * 10}")
    if points is None:
        points = out_of_tube_points(region, c, group, point_radius, n_points, delta_hat)
    points = list(points)
    if not points:
        raise PreconditionFailed("no points outside the tubes to test")

    probabilities: List[float] = []
    sigmas_per_point: List[float] = []
    for i, x in enumerate(points):
        p, s = exit_frequency(x, region, nu, group, radius, n_traj, seed, workers,
                              start_index=i * n_traj, delta_hat=float(delta_hat))
        probabilities.append(1 - p)
        sigmas_per_point.append(s)
    if lower_bound is None and _is_free_srw(group, nu):
        exact = cached_solver(group, nu, radius, SolverChoice.TREE).exit_probability(region, float(delta_hat))
        lower_bound = min(1 - exact(x) for x in points)
    bound = lower_bound if lower_bound is not None else 0.0

    worst = int(np.argmin(probabilities))
    eta_hat, eta_sigma = probabilities[worst], sigmas_per_point[worst]
    passed = eta_hat > 0 and eta_hat + sigmas * eta_sigma >= bound
    logger.info("Escape probability from outside the tubes", region=region.label(group), c=str(c),
                points=len(points), eta_hat=eta_hat, eta_sigma=eta_sigma, lower_bound=bound, passed=passed)
    return Lemma62Report(c=float(c), delta_hat=float(delta_hat), points=[group.format_word(x) for x in points],
                         probabilities=probabilities, eta_hat=eta_hat, eta_sigma=eta_sigma,
                         lower_bound=bound, passed=passed)
