"""Sorting under adversarial comparators: win-count sort and quick-sort, plus
the exact noiseless quick-sort cost used as the query-count oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algorithms import _resolve, _rng

__all__ = ["SortResult", "complete_sort", "quick_sort", "exact_expected_queries"]


@dataclass(frozen=True)
class SortResult:
    order: tuple[int, ...]  # item indices, intended decreasing
    queries: int


def complete_sort(session, items=None, rng=None) -> SortResult:
    """Query every pair once and output the items by descending win count,
    breaking ties uniformly at random."""
    items = _resolve(session, items)
    rng = _rng(rng)
    m = len(items)
    if m == 1:
        return SortResult((items[0],), 0)
    session.announce_pivot(None)
    start = session.queries
    wins = np.zeros(m, dtype=np.int64)
    for a in range(m):
        for b in range(a + 1, m):
            w = session.query(items[a], items[b])
            wins[a if w == items[a] else b] += 1
    tie_rank = np.empty(m, dtype=np.int64)
    tie_rank[rng.permutation(m)] = np.arange(m)
    order = np.lexsort((tie_rank, -wins))
    return SortResult(tuple(items[p] for p in order), session.queries - start)


def quick_sort(session, items=None, rng=None) -> SortResult:
    """Classic randomized quick-sort: partition on a uniform pivot into the
    items that beat it and the items it beat (stable encounter order), recurse
    winners-side first."""
    items = _resolve(session, items)
    rng = _rng(rng)
    start = session.queries
    order: list[int] = []
    # explicit stack (winners segment processed first) so deep partitions
    # cannot hit the recursion limit
    stack: list[tuple[bool, object]] = [(False, list(items))]
    while stack:
        emit, payload = stack.pop()
        if emit:
            order.append(payload)  # type: ignore[arg-type]
            continue
        arr: list[int] = payload  # type: ignore[assignment]
        if len(arr) <= 1:
            order.extend(arr)
            continue
        p = int(rng.integers(len(arr)))
        pivot = arr[p]
        session.announce_pivot(pivot)
        winners, losers = [], []
        for k, x in enumerate(arr):
            if k == p:
                continue
            w = session.query(pivot, x)
            (winners if w == x else losers).append(x)
        stack.append((False, losers))
        stack.append((True, pivot))
        stack.append((False, winners))
    return SortResult(tuple(order), session.queries - start)


def exact_expected_queries(n: int) -> float:
    """Expected comparison count of noiseless quick-sort on n distinct inputs,
    from the recursion q_0 = 0, q_n = n - 1 + (2/n) * sum(q_0 .. q_{n-1})."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n <= 1:
        return 0.0
    q = 0.0
    acc = 0.0  # q_0 + ... + q_{m-1}
    for m in range(1, n + 1):
        q = m - 1 + 2.0 * acc / m
        acc += q
    return q
