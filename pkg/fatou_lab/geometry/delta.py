"""
Finite-ball estimates of the hyperbolicity constant.

Four-point values are kept doubled: for a quadruple with pair sums
L >= M >= S the four-point defect is (L - M) / 2, so `twice` = L - M.
"""
from __future__ import annotations

from functools import partial
from itertools import combinations
from math import comb
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog
from numba import njit

from fatou_lab.config import settings
from fatou_lab.core.exceptions import BudgetExceeded
from fatou_lab.core.parallel import parallel_map
from fatou_lab.core.schemas import DeltaEstimate, DeltaMethod
from fatou_lab.geometry.metric import ball, distance_matrix, thinness
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.walks.rng import Purpose, RngStream

logger = structlog.get_logger(__name__)

SAMPLE_CHUNK = 20_000


@njit(cache=True)
def _four_point_exhaustive(D):
    n = D.shape[0]
    best = 0
    witness = np.zeros(4, dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            dij = D[i, j]
            for k in range(j + 1, n):
                dik = D[i, k]
                djk = D[j, k]
                for l in range(k + 1, n):
                    s1 = dij + D[k, l]
                    s2 = dik + D[j, l]
                    s3 = D[i, l] + djk
                    if s1 >= s2:
                        hi, mid = s1, s2
                    else:
                        hi, mid = s2, s1
                    if s3 > hi:
                        mid = hi
                        hi = s3
                    elif s3 > mid:
                        mid = s3
                    if hi - mid > best:
                        best = hi - mid
                        witness[0] = i
                        witness[1] = j
                        witness[2] = k
                        witness[3] = l
    return best, witness


def four_point_twice(D: np.ndarray, quads: np.ndarray) -> Tuple[int, Optional[np.ndarray]]:
    """Vectorised L - M over an array of index quadruples"""
    if len(quads) == 0:
        return 0, None
    i, j, k, l = quads.T
    sums = np.stack([D[i, j].astype(np.int32) + D[k, l],
                     D[i, k].astype(np.int32) + D[j, l],
                     D[i, l].astype(np.int32) + D[j, k]], axis=1)
    sums.sort(axis=1)
    gaps = sums[:, 2] - sums[:, 1]
    best = int(np.argmax(gaps))
    return int(gaps[best]), quads[best]


def _sample_chunk(args: Tuple[np.ndarray, int, int, int]) -> Tuple[int, Optional[List[int]]]:
    D, seed, index, count = args
    rng = RngStream(seed, index, Purpose.DELTA).generator()
    quads = rng.integers(0, D.shape[0], size=(count, 4))
    twice, witness = four_point_twice(D, quads)
    return twice, None if witness is None else [int(v) for v in witness]


def _thin_chunk(triangles: List[Tuple[Word, Word, Word]], group: GroupBackend) -> Tuple[int, Optional[Tuple]]:
    best, witness = 0, None
    for tri in triangles:
        t = thinness(*tri, group)
        if t > best:
            best, witness = t, tri
    return best, witness


def estimate_delta(
    group: GroupBackend,
    radius: int,
    method: DeltaMethod = DeltaMethod.FOUR_POINT,
    exhaustive: Optional[bool] = None,
    sample_count: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> DeltaEstimate:
    """
    Estimate delta on B(o, radius).

    exhaustive=None picks exhaustive enumeration when the number of
    quadruples (or triangles) fits the configured budget, sampling otherwise.
    """
    points: Sequence[Word] = ball(group, radius).order
    n = len(points)
    seed = settings.default_seed if seed is None else seed
    sample_count = sample_count or settings.delta_sample_count
    fmt = group.format_word

    if n < 3 or (method == DeltaMethod.FOUR_POINT and n < 4):
        return DeltaEstimate(twice=0, method=method, radius=radius, sample_count=0)

    if method == DeltaMethod.FOUR_POINT:
        tuples = comb(n, 4)
        if exhaustive is None:
            exhaustive = tuples <= settings.delta_quadruple_budget
        if exhaustive and tuples > settings.delta_quadruple_budget:
            raise BudgetExceeded(f"{tuples} quadruples exceed the budget {settings.delta_quadruple_budget}")
        D = distance_matrix(points, group)
        if exhaustive:
            twice, witness = _four_point_exhaustive(D.astype(np.int64))
            twice = int(twice)
            used = 0
        else:
            chunks = [(D, seed, index, min(SAMPLE_CHUNK, sample_count - start))
                      for index, start in enumerate(range(0, sample_count, SAMPLE_CHUNK))]
            results = parallel_map(_sample_chunk, chunks, workers)
            twice, witness = max(results, key=lambda r: r[0])
            used = sample_count
        labels = [fmt(points[int(v)]) for v in witness] if witness is not None and twice > 0 else []
    else:
        triangles = comb(n, 3)
        if exhaustive is None:
            exhaustive = triangles <= sample_count
        if exhaustive and triangles > settings.delta_quadruple_budget:
            raise BudgetExceeded(f"{triangles} triangles exceed the budget {settings.delta_quadruple_budget}")
        if exhaustive:
            tris = list(combinations(points, 3))
            used = 0
        else:
            rng = RngStream(seed, 0, Purpose.DELTA).generator()
            picks = rng.integers(0, n, size=(sample_count, 3))
            tris = [(points[a], points[b], points[c]) for a, b, c in picks]
            used = sample_count
        size = max(1, -(-len(tris) // max(1, settings.worker_count() * 4)))
        batches = [tris[s:s + size] for s in range(0, len(tris), size)]
        results = parallel_map(partial(_thin_chunk, group=group), batches, workers)
        best, witness = max(results, key=lambda r: r[0])
        twice = 2 * best
        labels = [fmt(p) for p in witness] if witness else []

    logger.info("Delta estimated", group=group.name, method=method.value, radius=radius,
                delta=twice / 2, exhaustive=used == 0, ball_size=n)
    return DeltaEstimate(twice=twice, method=method, radius=radius, sample_count=used, witness=labels)
