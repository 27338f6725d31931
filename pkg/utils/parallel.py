"""
Thread-pool map capped by SORKINLAB_THREADS
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List

from config import settings


def parallel_map(fn: Callable, items: Iterable) -> List:
    """Ordered map over items; runs inline when a single thread is configured"""
    items = list(items)
    threads = min(settings.SORKINLAB_THREADS, max(len(items), 1))
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
