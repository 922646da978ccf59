from typing import Dict, List, Optional, Sequence

import numpy as np
import structlog

from fatou_lab.core.constants import SIGMA_MULTIPLIER
from fatou_lab.core.schemas import MartingaleReport
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.potential.green import laplacian
from fatou_lab.potential.tabulated import TabulatedFunction
from fatou_lab.walks.distribution import StepDistribution
from fatou_lab.walks.engine import Trajectory

logger = structlog.get_logger(__name__)

IDENTITY_TOLERANCE = 1e-12


def martingale_check(u: TabulatedFunction, trajectories: Sequence[Trajectory], nu: StepDistribution,
                     group: GroupBackend, times: Optional[Sequence[int]] = None,
                     sigmas: float = SIGMA_MULTIPLIER) -> MartingaleReport:
    """
    M_n = u(X_n) - sum_{k<n} Lap u(X_k), stopped at the end of each trajectory.

    Checks the one-step identity E[u(X_{n+1}) | X_n = x] = u(x) + Lap u(x) at
    every visited non-final state, then that the mean of M_n stays at its
    starting value within `sigmas` standard errors.
    """
    lap: Dict[Word, float] = {}
    identity_error = 0.0
    for t in trajectories:
        for x in t.positions[:-1]:
            if x in lap:
                continue
            lap[x] = laplacian(u, x, nu, group)
            direct = sum(p * u(y) for y, p in nu.transitions(x))
            identity_error = max(identity_error, abs(direct - (u(x) + lap[x])))

    horizon = max(t.steps for t in trajectories)
    if times is None:
        times = sorted(set(np.linspace(0, horizon, num=min(horizon + 1, 11), dtype=int).tolist()))
    paths: List[np.ndarray] = []
    for t in trajectories:
        values = np.empty(horizon + 1)
        drift = 0.0
        for n, x in enumerate(t.positions):
            values[n] = u(x) - drift
            if n < t.steps:
                drift += lap[x]
        values[t.steps + 1:] = values[t.steps]
        paths.append(values)
    matrix = np.vstack(paths)[:, list(times)]
    n = matrix.shape[0]
    means = matrix.mean(axis=0)
    stderrs = matrix.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(len(times))
    z_scores = []
    for mean, stderr in zip(means, stderrs):
        spread = float(np.hypot(stderr, stderrs[0]))
        gap = abs(mean - means[0])
        z_scores.append(gap / spread if spread > 0 else (0.0 if gap <= IDENTITY_TOLERANCE else float("inf")))
    max_z = max(z_scores)
    scale = max((abs(v) for v in lap.values()), default=1.0)
    passed = identity_error <= IDENTITY_TOLERANCE * max(1.0, scale) and max_z <= sigmas
    logger.info("Martingale check", label=u.label, trajectories=n, identity_error=identity_error,
                max_z_score=max_z, passed=passed)
    return MartingaleReport(
        identity_max_error=identity_error,
        visited_states=len(lap),
        times=list(times),
        means=[float(m) for m in means],
        stderrs=[float(s) for s in stderrs],
        max_z_score=float(max_z),
        sigmas=sigmas,
        passed=passed,
    )
