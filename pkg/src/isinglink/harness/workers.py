"""Process-pool plumbing for the experiment harness.

Work is split into contiguous equal blocks of the instance axis (the
remainder goes to the last worker).  Workers share nothing mutable; the
parent reassembles per-instance results in block order, so reductions are
independent of the worker count.
"""

from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor

__all__ = ["partition_blocks", "run_blocks"]


def partition_blocks(n_items: int, n_workers: int) -> list[tuple[int, int]]:
    """Contiguous [start, stop) blocks, one per worker, remainder to the last."""
    if n_workers < 1:
        raise ValueError("n_workers must be >= 1")
    n_workers = min(n_workers, max(n_items, 1))
    size = n_items // n_workers
    blocks = [(i * size, (i + 1) * size) for i in range(n_workers)]
    blocks[-1] = (blocks[-1][0], n_items)
    return blocks


def run_blocks(fn, payloads: list) -> list:
    """Run ``fn`` over payloads, one worker process each; inline when single.

    Results come back in payload order.  The single-worker path avoids the
    pool entirely so that serial timing is undistorted.
    """
    if len(payloads) == 1:
        return [fn(payloads[0])]
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=len(payloads), mp_context=ctx) as pool:
        return list(pool.map(fn, payloads))
