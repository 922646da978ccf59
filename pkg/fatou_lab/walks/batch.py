"""
Indexed trajectory batches on the worker pool.

Trajectory i always draws from RngStream(seed, start + i, purpose), so batch
output is identical for any worker count.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterable, List, Optional, TextIO

import structlog

from fatou_lab.config import applied_budgets, settings
from fatou_lab.core.exceptions import BudgetExceeded
from fatou_lab.core.parallel import chunk_ranges, parallel_map
from fatou_lab.core.schemas import Budgets
from fatou_lab.groups.base import GroupBackend, Word
from fatou_lab.walks.distribution import StepDistribution
from fatou_lab.walks.engine import StopRule, Trajectory, simulate
from fatou_lab.walks.rng import Purpose, RngStream

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class PlainSimulator:
    """Picklable simulate() closure for the worker pool"""
    z: Word
    nu: StepDistribution
    group: GroupBackend
    stop: StopRule
    step_cap: Optional[int] = None

    def __call__(self, stream: RngStream) -> Trajectory:
        return simulate(self.z, self.nu, self.group, self.stop, stream, self.step_cap)


def _keep(trajectory: Trajectory) -> Trajectory:
    return trajectory


@dataclass(frozen=True)
class _Chunk:
    simulator: Callable[[RngStream], Trajectory]
    reducer: Callable[[Trajectory], Any]
    seed: int
    purpose: Purpose
    start: int
    end: int
    budgets: Budgets

    def __call__(self) -> List[Any]:
        # worker processes do not share the parent's settings
        with applied_budgets(self.budgets):
            return [self.reducer(self.simulator(RngStream(self.seed, i, self.purpose)))
                    for i in range(self.start, self.end)]


def _run_chunk(chunk: _Chunk) -> List[Any]:
    return chunk()


def map_trajectories(
    simulator: Callable[[RngStream], Trajectory],
    n_traj: int,
    seed: int,
    reducer: Callable[[Trajectory], Any] = _keep,
    purpose: Purpose = Purpose.PLAIN,
    start_index: int = 0,
    workers: Optional[int] = None,
    budgets: Optional[Budgets] = None,
) -> List[Any]:
    """
    reducer(trajectory) for trajectory indices start_index .. start_index + n_traj - 1,
    in index order. Reducers run inside the workers so only their results travel back.
    Without explicit budgets the calling process's current settings are used.
    """
    budgets = budgets or Budgets()
    if n_traj > budgets.trajectories:
        raise BudgetExceeded(f"{n_traj} trajectories requested, budget is {budgets.trajectories}")
    workers = settings.worker_count() if workers is None else workers
    chunks = [
        _Chunk(simulator, reducer, seed, purpose, start_index + a, start_index + b, budgets)
        for a, b in chunk_ranges(n_traj, workers)
    ]
    logger.debug("Running trajectory batch", n_traj=n_traj, chunks=len(chunks), workers=workers,
                 purpose=purpose.name.lower())
    results: List[Any] = []
    for part in parallel_map(_run_chunk, chunks, workers):
        results.extend(part)
    return results


def simulate_batch(
    z: Word,
    nu: StepDistribution,
    group: GroupBackend,
    stop: StopRule,
    n_traj: int,
    seed: int,
    purpose: Purpose = Purpose.PLAIN,
    start_index: int = 0,
    workers: Optional[int] = None,
    step_cap: Optional[int] = None,
    budgets: Optional[Budgets] = None,
) -> List[Trajectory]:
    return map_trajectories(PlainSimulator(z, nu, group, stop, step_cap), n_traj, seed,
                            purpose=purpose, start_index=start_index, workers=workers, budgets=budgets)


def write_jsonl(trajectories: Iterable[Trajectory], out: TextIO, group: GroupBackend) -> int:
    """One JSON record {seed, positions, ...} per line; returns the count written"""
    count = 0
    for t in trajectories:
        out.write(t.to_json(group))
        out.write("\n")
        count += 1
    return count
