"""
Replica pool.

Runs replica functions over index ranges, serially or in worker processes,
and returns results ordered by replica index regardless of completion order.
"""

import concurrent.futures
import logging
from typing import Any, Callable, Dict, List, Tuple

logger = logging.getLogger(__name__)

# fn(index, payload) -> result; must be a module-level function (pickled to workers)
ReplicaFn = Callable[[int, Any], Any]


def _run_chunk(task: Tuple[ReplicaFn, int, int, Any]) -> Tuple[int, List[Any]]:
    fn, start, stop, payload = task
    return start, [fn(index, payload) for index in range(start, stop)]


class ReplicaPool:
    """
    Deterministic replica scheduler.

    Each replica derives its own randomness from its index, so merging by
    index makes the output independent of worker count.
    """

    def __init__(self, workers: int = 1, chunks_per_worker: int = 4):
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self.workers = workers
        self.chunks_per_worker = chunks_per_worker

    def _chunks(self, n: int) -> List[Tuple[int, int]]:
        n_chunks = max(1, min(n, self.workers * self.chunks_per_worker))
        size = -(-n // n_chunks)
        return [(start, min(start + size, n)) for start in range(0, n, size)]

    def map(self, fn: ReplicaFn, n: int, payload: Any = None) -> List[Any]:
        """
        Run fn for replica indices 0..n-1.

        Args:
            fn: Module-level replica function fn(index, payload)
            n: Number of replicas
            payload: Immutable shared input (pickled once per chunk)

        Returns:
            Results ordered by replica index
        """
        if n <= 0:
            return []

        if self.workers == 1:
            return [fn(index, payload) for index in range(n)]

        tasks = [(fn, start, stop, payload) for start, stop in self._chunks(n)]
        results: Dict[int, List[Any]] = {}

        with concurrent.futures.ProcessPoolExecutor(max_workers=self.workers) as executor:
            futures = {executor.submit(_run_chunk, task): task[1] for task in tasks}
            for future in concurrent.futures.as_completed(futures):
                start, chunk = future.result()
                results[start] = chunk

        logger.debug(f"Merged {len(results)} chunks from {self.workers} workers")
        merged: List[Any] = []
        for start in sorted(results):
            merged.extend(results[start])
        return merged
