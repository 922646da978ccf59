"""
Non-tangential behaviour of a function along a tube: per-annulus suprema and
oscillations, turned into bounded / convergent verdicts at finite scale.
"""
from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import structlog

from fatou_lab.boundary.tubes import TubeSpec, tube_points
from fatou_lab.core.constants import CONVERGENCE_RATIO, SATURATION_RATIO, VERDICT_WINDOW
from fatou_lab.core.exceptions import PreconditionFailed
from fatou_lab.core.numbers import HalfInt
from fatou_lab.core.schemas import NtReport, NtVerdicts
from fatou_lab.potential.tabulated import TabulatedFunction
from fatou_lab.groups.base import Word

logger = structlog.get_logger(__name__)


def default_annuli(radius: int, width: int = 2, count: int = 4) -> List[Tuple[int, int]]:
    """Up to `count` consecutive annuli of the given width ending at radius, none reaching below 1"""
    return [(r, r + width) for r in range(radius - width * count, radius, width) if r >= 1]


def _verdicts(sups: Sequence[Optional[float]], lows: Sequence[Optional[float]],
              highs: Sequence[Optional[float]], window: int) -> NtVerdicts:
    tail = list(range(len(sups) - window, len(sups)))
    if not sups or any(sups[i] is None for i in tail):
        return NtVerdicts(bounded=False, convergent=False, saturating=False, censored=True)
    low = min(lows[i] for i in tail)
    high = max(highs[i] for i in tail)
    limit = (lows[tail[-1]] + highs[tail[-1]]) / 2
    convergent = high - low <= CONVERGENCE_RATIO * (1 + abs(limit))
    last = sups[tail[-1]]
    growth = last - sups[tail[0]]
    bounded = convergent or growth <= SATURATION_RATIO * (1 + abs(last))
    overall = max(s for s in sups if s is not None)
    saturating = abs(overall - last) <= SATURATION_RATIO * max(abs(overall), 1e-300)
    return NtVerdicts(bounded=bounded, convergent=convergent, saturating=saturating,
                      limit=limit if convergent else None)


def nt_report(u: TabulatedFunction, tube: TubeSpec, annuli: Sequence[Tuple[int, int]], o: Word = (),
              delta_hat: HalfInt | int = 0, window: int = VERDICT_WINDOW) -> NtReport:
    """
    sup |u| and max u - min u over the In points of each annulus r1 <= |x| <= r2.
    Uncertain points are counted, never used. An annulus with no In points is
    reported as empty and censors the verdict if it falls in the final window.
    """
    group = tube.theta.group
    if not annuli:
        raise PreconditionFailed("nt_report needs at least one annulus")
    outer = max(r2 for _, r2 in annuli)
    classified = tube_points(tube, outer, o, delta_hat)
    window = min(window, len(annuli))

    sups: List[Optional[float]] = []
    oscs: List[Optional[float]] = []
    lows: List[Optional[float]] = []
    highs: List[Optional[float]] = []
    counts: List[int] = []
    uncertain: List[int] = []
    empty: List[int] = []
    for i, (r1, r2) in enumerate(annuli):
        inside = [x for x in classified.inside if r1 <= group.distance(o, x) <= r2]
        uncertain.append(sum(1 for x in classified.uncertain if r1 <= group.distance(o, x) <= r2))
        counts.append(len(inside))
        if not inside:
            empty.append(i)
            sups.append(None); oscs.append(None); lows.append(None); highs.append(None)
            continue
        values = [u(x) for x in inside]
        lo, hi = min(values), max(values)
        sups.append(max(abs(lo), abs(hi)))
        oscs.append(hi - lo)
        lows.append(lo)
        highs.append(hi)

    verdicts = _verdicts(sups, lows, highs, window)
    if empty:
        logger.warning("Empty annuli in tube", theta=tube.theta.description, c=str(tube.c), annuli=empty)
    logger.debug("Non-tangential report", theta=tube.theta.description, c=str(tube.c), label=u.label,
                 bounded=verdicts.bounded, convergent=verdicts.convergent, censored=verdicts.censored)
    return NtReport(
        theta=tube.theta.description,
        c=float(tube.c),
        radii=list(annuli),
        sup_per_annulus=sups,
        osc_per_annulus=oscs,
        points_per_annulus=counts,
        uncertain_per_annulus=uncertain,
        empty_annuli=empty,
        verdicts=verdicts,
    )
