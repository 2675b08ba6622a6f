"""Ordered thread-pool map capped by the BESOVCLAW_THREADS environment variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    raw = os.environ.get("BESOVCLAW_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"BESOVCLAW_THREADS must be an integer, got {raw!r}") from None


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Map preserving input order; each item's result is independent of scheduling."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
