"""Order-preserving parallel map shared by the per-sentence stages."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence


def ordered_map(fn: Callable, items: Sequence, workers: int = 1, chunk_size: int = 256) -> list:
    """``[fn(x) for x in items]``, evaluated on ``workers`` threads.

    Results always come back in input order, so output does not depend on
    the worker count.
    """
    items = list(items)
    if workers <= 1 or len(items) <= chunk_size:
        return [fn(x) for x in items]
    chunks = [items[i:i + chunk_size] for i in range(0, len(items), chunk_size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda chunk: [fn(x) for x in chunk], chunks)
        return [y for part in parts for y in part]
