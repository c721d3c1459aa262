"""Order-preserving parallel map over independent jobs.

``MPDS_VERIFY_THREADS`` caps the worker count (0 or unset = one per CPU).
Results come back in input order, so reports do not depend on scheduling.
"""
import os
from concurrent.futures import ThreadPoolExecutor


def thread_count(default: int = 0) -> int:
    raw = os.environ.get("MPDS_VERIFY_THREADS", "")
    try:
        n = int(raw) if raw.strip() else default
    except ValueError:
        n = default
    return n if n > 0 else (os.cpu_count() or 1)


def pmap(fn, items, threads=None) -> list:
    items = list(items)
    n = thread_count() if threads is None else max(1, threads)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
