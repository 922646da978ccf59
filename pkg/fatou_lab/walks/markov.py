"""
Empirical strong Markov property at the exit time of a ball: the step taken
right after T = ExitBall(R) follows nu, whatever cell X_T falls in.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import structlog
from scipy.stats import chisquare

from fatou_lab.core.exceptions import PreconditionFailed
from fatou_lab.core.schemas import StrongMarkovReport
from fatou_lab.geometry.metric import geodesic
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.walks.batch import map_trajectories
from fatou_lab.walks.distribution import StepDistribution
from fatou_lab.walks.engine import ExitBall, Trajectory, simulate
from fatou_lab.walks.rng import RngStream, UniformFeed

logger = structlog.get_logger(__name__)

MIN_CELL = 500


@dataclass(frozen=True)
class ExitThenStep:
    """Walk from z until ExitBall(radius), then one more step from the same stream"""
    z: Word
    nu: StepDistribution
    group: GroupBackend
    radius: int

    def __call__(self, stream: RngStream) -> Trajectory:
        feed = UniformFeed(stream.generator())
        t = simulate(self.z, self.nu, self.group, ExitBall(self.radius), feed)
        last = t.last
        t.positions.append(self.group.multiply(last, self.nu.words[self.nu.draw(feed.next())]))
        return t


@dataclass(frozen=True)
class _CellAndIncrement:
    level: int
    group: GroupBackend

    def __call__(self, t: Trajectory) -> Tuple[Word, Word]:
        exit_point, after = t.positions[-2], t.positions[-1]
        cell = geodesic((), exit_point, self.group).vertices[self.level]
        return cell, self.group.multiply(self.group.inverse(exit_point), after)


def strong_markov_check(nu: StepDistribution, group: GroupBackend, radius: int, n_traj: int, seed: int,
                        level: int = 1, min_cell: int = MIN_CELL, alpha: float = 1e-3,
                        workers: Optional[int] = None) -> StrongMarkovReport:
    """
    Chi-square goodness of fit of X_T^-1 X_{T+1} against nu within every exit
    cell (prefix of length `level` of the exit point) holding at least
    `min_cell` samples. The per-cell level is alpha over the number of cells.
    """
    if not 0 <= level <= radius:
        raise PreconditionFailed(f"cell level {level} must lie in [0, {radius}]")
    rows = map_trajectories(ExitThenStep((), nu, group, radius), n_traj, seed,
                            reducer=_CellAndIncrement(level, group), workers=workers)
    by_cell: Dict[Word, Counter] = defaultdict(Counter)
    for cell, increment in rows:
        by_cell[cell][increment] += 1

    expected_law = np.array(nu.probabilities, dtype=float)
    tested: List[Word] = [c for c in sorted(by_cell) if sum(by_cell[c].values()) >= min_cell]
    p_values: Dict[str, float] = {}
    for cell in tested:
        counts = by_cell[cell]
        observed = np.array([counts.get(w, 0) for w in nu.words], dtype=float)
        if observed.sum() != sum(counts.values()):
            raise PreconditionFailed(f"increment outside the support of {nu.label} after exit")
        p_values[group.format_word(cell)] = float(chisquare(observed, expected_law * observed.sum()).pvalue)

    threshold = alpha / max(1, len(tested))
    min_p = min(p_values.values(), default=None)
    passed = min_p is None or min_p >= threshold
    logger.info("Strong Markov check", nu=nu.label, radius=radius, cells=len(tested), min_p_value=min_p,
                passed=passed)
    return StrongMarkovReport(radius=radius, level=level, n_traj=n_traj,
                              cells={group.format_word(c): sum(by_cell[c].values()) for c in sorted(by_cell)},
                              p_values=p_values, min_p_value=min_p, alpha=alpha, passed=passed)
