from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import structlog

T = TypeVar("T")
R = TypeVar("R")

logger = structlog.get_logger(__name__)


def chunk_ranges(n: int, workers: int, min_chunk: int = 64) -> List[Tuple[int, int]]:
    """Split [0, n) into contiguous index ranges, a few per worker"""
    if n <= 0:
        return []
    pieces = max(1, min(n // min_chunk, 4 * workers))
    size = -(-n // pieces)
    return [(start, min(start + size, n)) for start in range(0, n, size)]


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None) -> List[R]:
    """
    Map fn over items on a process pool, results in item order.

    fn and items must be picklable. With one worker everything runs in-process.
    """
    if workers is None:
        from fatou_lab.config import settings
        workers = settings.worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug("Dispatching work", items=len(items), workers=workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
