"""Maximum-selection algorithms. Each one talks to the world only through a
session's ``query`` (and ``announce_pivot``), so it runs unchanged against
non-adaptive graphs, adaptive strategies, or the Scheffe comparator.

Randomness comes from an explicit ``numpy.random.Generator``; the draw
sequence is part of each algorithm's contract (the vectorized engine in
``engine.py`` replays the exact same draws).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "SelectionResult",
    "KoModParams",
    "CombParams",
    "complete_tournament",
    "sequential_select",
    "knockout_round",
    "modified_knockout",
    "quickselect_round",
    "quick_select",
    "combined_select",
]


@dataclass(frozen=True)
class SelectionResult:
    winner: int
    queries: int
    rounds: int


@dataclass(frozen=True)
class KoModParams:
    """Knock-out schedule: pool size n1 = ceil((1/eps) ln(1/eps) log2 n),
    floored at 2."""

    epsilon: float
    n1: int

    @classmethod
    def compute(cls, epsilon: float, n: int) -> "KoModParams":
        if not (0 < epsilon < 1):
            raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
        raw = (1.0 / epsilon) * math.log(1.0 / epsilon) * math.log2(max(n, 2))
        return cls(epsilon=epsilon, n1=max(2, math.ceil(raw)))


@dataclass(frozen=True)
class CombParams:
    """Constants of the knock-out / quick-select combination."""

    epsilon: float
    beta1: float = 9.0
    beta2: float = 25.0
    shrink_threshold: float = 2.0 / 3.0
    win_fraction: float = 3.0 / 4.0

    def __post_init__(self):
        if not (0 < self.epsilon < 1):
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")

    def qs_reps(self) -> int:
        return max(1, math.floor(self.beta1 * math.log2(1.0 / self.epsilon)))

    def ko_reps(self, round_index: int) -> int:
        raw = self.beta2 * (4.0 / 3.0) ** round_index * math.log2(1.0 / self.epsilon)
        return max(1, math.floor(raw))


def _resolve(session, items) -> list[int]:
    if items is None:
        items = range(session.n_items)
    items = [int(x) for x in items]
    if not items:
        raise ValueError("need at least one item")
    return items


def _rng(rng) -> np.random.Generator:
    return rng if rng is not None else np.random.default_rng()


def _pick_max_wins(items: Sequence[int], wins: Sequence[int], rng) -> int:
    best = max(wins)
    maxers = [x for x, w in zip(items, wins) if w == best]
    if len(maxers) == 1:
        return maxers[0]
    return maxers[int(rng.integers(len(maxers)))]


def complete_tournament(session, items=None, rng=None) -> SelectionResult:
    """Round-robin: query every pair once, return an item with the most wins
    (ties broken uniformly). The output value is always within 2 of the
    maximum, against any adversary."""
    items = _resolve(session, items)
    rng = _rng(rng)
    m = len(items)
    if m == 1:
        return SelectionResult(items[0], 0, rounds=1)
    session.announce_pivot(None)
    wins = [0] * m
    start = session.queries
    for a in range(m):
        for b in range(a + 1, m):
            w = session.query(items[a], items[b])
            wins[a if w == items[a] else b] += 1
    winner = _pick_max_wins(items, wins, rng)
    return SelectionResult(winner, session.queries - start, rounds=1)


def sequential_select(session, items=None, rng=None) -> SelectionResult:
    """Visit the items in uniformly random order, always keeping the winner
    of the last comparison. Exactly n-1 queries."""
    items = _resolve(session, items)
    rng = _rng(rng)
    m = len(items)
    if m == 1:
        return SelectionResult(items[0], 0, rounds=1)
    session.announce_pivot(None)
    order = rng.permutation(m)
    start = session.queries
    champ = items[order[0]]
    for k in range(1, m):
        champ = session.query(items[order[k]], champ)
    return SelectionResult(champ, session.queries - start, rounds=1)


def knockout_round(session, items, rng) -> list[int]:
    """Pair the items of one random perfect matching and keep the winners;
    an odd leftover gets a bye. floor(m/2) queries, ceil(m/2) survivors."""
    items = _resolve(session, items)
    m = len(items)
    if m == 1:
        return list(items)
    session.announce_pivot(None)
    perm = rng.permutation(m)
    survivors = []
    for t in range(m // 2):
        survivors.append(session.query(items[perm[2 * t]], items[perm[2 * t + 1]]))
    if m % 2:
        survivors.append(items[perm[m - 1]])
    return survivors


def modified_knockout(session, epsilon: float, items=None, rng=None,
                      params: Optional[KoModParams] = None) -> SelectionResult:
    """Knock-out rounds with a saved pool: before each round, copy n1 random
    items into the pool, then halve the field; finish with a round-robin over
    the survivors plus the pool (deduplicated, field first)."""
    items = _resolve(session, items)
    rng = _rng(rng)
    if params is None:
        params = KoModParams.compute(epsilon, len(items))
    start = session.queries
    x = list(items)
    saved: list[int] = []
    rounds = 0
    while len(x) > params.n1:
        picked = rng.choice(len(x), size=params.n1, replace=False)
        saved.extend(x[p] for p in picked)
        x = knockout_round(session, x, rng)
        rounds += 1
    seen = set(x)
    final = list(x)
    for y in saved:
        if y not in seen:
            seen.add(y)
            final.append(y)
    result = complete_tournament(session, final, rng)
    return SelectionResult(result.winner, session.queries - start, rounds=rounds + 1)


def quickselect_round(session, items, rng) -> list[int]:
    """Pick a random pivot and compare it to everything else; keep whatever
    beat the pivot, or the pivot itself if nothing did."""
    items = _resolve(session, items)
    m = len(items)
    if m == 1:
        return list(items)
    p = int(rng.integers(m))
    pivot = items[p]
    session.announce_pivot(pivot)
    winners = []
    for k in range(m):
        if k == p:
            continue
        w = session.query(pivot, items[k])
        if w == items[k]:
            winners.append(items[k])
    return winners if winners else [pivot]


def quick_select(session, items=None, rng=None) -> SelectionResult:
    """Iterate quickselect rounds down to a single survivor. Zero-error
    2-approximation against any adversary; expected queries below 2n against
    non-adaptive ones."""
    items = _resolve(session, items)
    rng = _rng(rng)
    start = session.queries
    x = list(items)
    rounds = 0
    while len(x) > 1:
        x = quickselect_round(session, x, rng)
        rounds += 1
    return SelectionResult(x[0], session.queries - start, rounds=rounds)


def combined_select(session, epsilon: float, items=None, rng=None,
                    params: Optional[CombParams] = None,
                    record_sizes: Optional[list] = None) -> SelectionResult:
    """Knock-out / quick-select combination: each round runs a fixed budget of
    quickselect rounds, and if the field has not shrunk to 2/3 of its starting
    size, repeatedly re-pairs the *fixed* field and keeps the items that won
    more than 3/4 of the repetitions (byes count as wins), falling back to a
    single top-winner.

    ``record_sizes``, if given, receives the field size at the start of every
    round plus the final size.
    """
    items = _resolve(session, items)
    rng = _rng(rng)
    if params is None:
        params = CombParams(epsilon=epsilon)
    qs_reps = params.qs_reps()
    start = session.queries
    x = list(items)
    i = 0
    while len(x) > 1:
        i += 1
        n_i = len(x)
        if record_sizes is not None:
            record_sizes.append(n_i)
        for _ in range(qs_reps):
            x = quickselect_round(session, x, rng)
        if len(x) > params.shrink_threshold * n_i:
            reps = params.ko_reps(i)
            m = len(x)
            wins = [0] * m
            session.announce_pivot(None)
            for _ in range(reps):
                perm = rng.permutation(m)
                for t in range(m // 2):
                    a, b = perm[2 * t], perm[2 * t + 1]
                    w = session.query(x[a], x[b])
                    wins[a if w == x[a] else b] += 1
                if m % 2:
                    wins[perm[m - 1]] += 1  # bye counts as a win
            threshold = params.win_fraction * reps
            keep = [x[p] for p in range(m) if wins[p] > threshold]
            if keep:
                x = keep
            else:
                x = [_pick_max_wins(x, wins, rng)]
    if record_sizes is not None:
        record_sizes.append(len(x))
    return SelectionResult(x[0], session.queries - start, rounds=i)
