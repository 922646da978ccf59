"""
Bounded-versus-convergent contingency over boundary points sampled from the
harmonic measure at o.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import structlog

from fatou_lab.boundary.rays import BoundaryRay
from fatou_lab.boundary.shadows import gromov_product_to_ray, ray_gromov_product
from fatou_lab.boundary.tubes import TubeSpec
from fatou_lab.conditioning.simulate import sample_boundary_points
from fatou_lab.core.numbers import HalfInt
from fatou_lab.core.parallel import parallel_map
from fatou_lab.core.schemas import Contingency, NtReport, TheoremReport
from fatou_lab.experiments.nontangential import default_annuli, nt_report
from fatou_lab.groups.base import GroupBackend
from fatou_lab.potential.tabulated import TabulatedFunction
from fatou_lab.walks.distribution import StepDistribution

logger = structlog.get_logger(__name__)

MAX_CENSORED_FRACTION = 0.10


def pole_censor_depth(radius: int) -> int:
    return max(1, (radius - 8) // 2)


def near_pole(theta: BoundaryRay, poles: Sequence, depth: int) -> bool:
    """Whether theta shares at least `depth` with one of u's poles"""
    for pole in poles:
        if isinstance(pole, BoundaryRay):
            product = ray_gromov_product(theta, pole, depth=2 * depth + 2)
        else:
            product = gromov_product_to_ray(pole, theta)
        if product >= depth:
            return True
    return False


def classify(report: NtReport) -> Contingency:
    """One nt report as a single-count contingency"""
    v = report.verdicts
    if v.censored:
        return Contingency(censored=1)
    if v.bounded and v.convergent:
        return Contingency(bounded_convergent=1)
    if v.bounded:
        return Contingency(bounded_not_convergent=1)
    if v.convergent:
        return Contingency(unbounded_convergent=1)
    return Contingency(unbounded_not_convergent=1)


@dataclass(frozen=True)
class _ClassifyTheta:
    u: TabulatedFunction
    c_values: Tuple[HalfInt, ...]
    annuli: Tuple[Tuple[int, int], ...]
    delta_hat: HalfInt
    censor_depth: int

    def __call__(self, theta: BoundaryRay) -> List[Contingency]:
        if near_pole(theta, self.u.poles, self.censor_depth):
            return [Contingency(censored=1) for _ in self.c_values]
        return [classify(nt_report(self.u, TubeSpec(theta, c), self.annuli, delta_hat=self.delta_hat))
                for c in self.c_values]


def theorem_experiment(u: TabulatedFunction, nu: StepDistribution, group: GroupBackend, n_thetas: int,
                       c_values: Sequence[HalfInt | int], radius: int, seed: int,
                       delta_hat: HalfInt | int = 0, annuli: Optional[Sequence[Tuple[int, int]]] = None,
                       max_censored_fraction: float = MAX_CENSORED_FRACTION,
                       workers: Optional[int] = None) -> TheoremReport:
    """
    Sample theta ~ mu_o as frozen rays, classify each against every tube radius
    and count bounded/convergent outcomes. The run passes when no theta is
    bounded without converging and censoring stays below the allowed share.
    """
    group.require_boundary("theorem_experiment")
    c_values = tuple(HalfInt.of(c) for c in c_values)
    annuli = tuple(annuli or default_annuli(radius))
    censor_depth = pole_censor_depth(radius)
    thetas = sample_boundary_points((), nu, group, radius, n_thetas, seed, workers)

    rows = parallel_map(_ClassifyTheta(u, c_values, annuli, HalfInt.of(delta_hat), censor_depth), thetas, workers)
    per_c: Dict[str, Contingency] = {}
    for j, c in enumerate(c_values):
        table = Contingency()
        for row in rows:
            table = table.add(row[j])
        per_c[str(c)] = table
    pooled = Contingency()
    for table in per_c.values():
        pooled = pooled.add(table)

    censored_fraction = max((t.censored_fraction for t in per_c.values()), default=0.0)
    passed = pooled.bounded_not_convergent == 0 and censored_fraction <= max_censored_fraction
    logger.info("Theorem experiment", function=u.label, n_thetas=n_thetas, bounded_not_convergent=pooled.bounded_not_convergent,
                censored_fraction=censored_fraction, passed=passed)
    return TheoremReport(
        function=u.label,
        n_thetas=n_thetas,
        radius=radius,
        c_values=[float(c) for c in c_values],
        per_c=per_c,
        pooled=pooled,
        censored_fraction=censored_fraction,
        max_censored_fraction=max_censored_fraction,
        passed=passed,
    )
