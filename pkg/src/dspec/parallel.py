# parallel.py
"""Thread-level parallel map for quadrature loops.

DSPEC_THREADS caps the worker count (default: cpu count, at most 8).  The
heavy kernels release the GIL inside numpy/scipy, so threads are enough;
nothing here forks processes.  Work items must be independent and the
mapped function effect-free.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    env = os.environ.get("DSPEC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(os.cpu_count() or 1, 8))


def thread_map(fn, items):
    """Order-preserving map over ``items``; serial when it isn't worth it."""
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as ex:
        return list(ex.map(fn, items))
