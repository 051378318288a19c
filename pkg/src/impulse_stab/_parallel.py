"""Thread-pool helper honoring the IMPULSE_STAB_THREADS environment
variable (0 or unset = automatic, 1 = serial).

Work items are indexed and results returned in index order, so the worker
count never changes any output.  Threads are effective here because the
compiled stepping kernel releases the GIL.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("IMPULSE_STAB_THREADS", "0").strip()
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(os.cpu_count() or 1, 8)
    return max(n, 1)


def map_indexed(fn, count: int) -> list:
    """[fn(0), ..., fn(count - 1)], possibly computed concurrently."""
    if count <= 0:
        return []
    workers = min(worker_count(), count)
    if workers == 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))
