"""Domain types shared by every module: value instances, query records, seeds.

The comparator model: given two distinct item indices i, j over a value
multiset, the comparator must return the index of the larger value whenever
the two values differ by more than ``delta``; when they are within ``delta``
of each other the answer is free (and possibly adversarial).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "Instance",
    "QueryRecord",
    "QueryLog",
    "RngSeed",
    "InvalidQueryError",
    "forced_winner",
    "is_t_approx",
    "is_t_sorted",
    "validate_log",
]


class InvalidQueryError(ValueError):
    """A query violated the comparator preconditions (i == j or bad index)."""


@dataclass(frozen=True)
class Instance:
    """An indexed multiset of real values plus the comparison threshold.

    Item identity is the index; duplicate values are allowed. ``delta``
    defaults to 1, the usual normalization.
    """

    values: tuple[float, ...]
    delta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) < 1:
            raise ValueError("instance needs at least one value")
        if not (self.delta > 0):
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("all values must be finite")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def max_value(self) -> float:
        return max(self.values)

    @cached_property
    def values_array(self) -> np.ndarray:
        arr = np.asarray(self.values, dtype=np.float64)
        arr.flags.writeable = False
        return arr

    def check_index(self, i: int) -> int:
        if not (0 <= i < self.n):
            raise InvalidQueryError(f"index {i} out of range for n={self.n}")
        return int(i)

    def to_json(self) -> str:
        return json.dumps({"values": list(self.values), "delta": self.delta})

    @classmethod
    def from_json(cls, text: str | dict) -> "Instance":
        obj = json.loads(text) if isinstance(text, str) else text
        if not isinstance(obj, dict) or "values" not in obj:
            raise ValueError("instance JSON must be an object with a 'values' array")
        return cls(values=tuple(obj["values"]), delta=float(obj.get("delta", 1.0)))


@dataclass(frozen=True)
class QueryRecord:
    """One answered comparison: which pair, who won, and when."""

    left: int
    right: int
    winner: int
    ordinal: int

    def __post_init__(self):
        if self.left == self.right:
            raise InvalidQueryError("query pairs two distinct indices")
        if self.winner not in (self.left, self.right):
            raise ValueError("winner must be one of the queried indices")


class QueryLog:
    """Ordered transcript of comparisons plus a running count.

    Recording the full transcript can be switched off for bulk Monte-Carlo
    runs; the count is always maintained.
    """

    __slots__ = ("records", "count", "recording")

    def __init__(self, recording: bool = True):
        self.records: list[QueryRecord] = []
        self.count: int = 0
        self.recording = recording

    def append(self, left: int, right: int, winner: int) -> None:
        if self.recording:
            self.records.append(QueryRecord(left, right, winner, self.count))
        self.count += 1

    def __len__(self) -> int:
        return self.count

    def __iter__(self):
        return iter(self.records)


@dataclass(frozen=True)
class RngSeed:
    """A (seed, stream) pair that roots every random choice downstream.

    Sub-streams are derived through ``numpy.random.SeedSequence`` spawn keys,
    so per-trial generators are independent and independent of execution
    order.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream < 0:
            raise ValueError("seed and stream must be non-negative")

    def sequence(self, *key: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream, *key))

    def generator(self, *key: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.sequence(*key)))


def forced_winner(instance: Instance, i: int, j: int) -> Optional[int]:
    """Index of the forced winner of (i, j), or None when the pair is free.

    A pair is forced exactly when the value gap strictly exceeds ``delta``.
    """
    i = instance.check_index(i)
    j = instance.check_index(j)
    if i == j:
        raise InvalidQueryError("cannot compare an index with itself")
    vi, vj = instance.values[i], instance.values[j]
    if abs(vi - vj) > instance.delta:
        return i if vi > vj else j
    return None


def is_t_approx(output_value: float, instance: Instance, t: float) -> bool:
    """True iff ``output_value`` is within ``t`` of the instance maximum."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return output_value >= instance.max_value - t


def validate_log(instance: Instance, log: QueryLog) -> None:
    """Assert every recorded answer obeys the forced-outcome rule.

    Raises ValueError on the first record whose pair has a gap above delta
    but whose winner is not the larger value's index.
    """
    for rec in log:
        want = forced_winner(instance, rec.left, rec.right)
        if want is not None and rec.winner != want:
            raise ValueError(
                f"record {rec.ordinal}: pair ({rec.left}, {rec.right}) is "
                f"forced toward {want} but {rec.winner} won")


def is_t_sorted(output_order: Sequence[float] | Iterable[float], t: float) -> bool:
    """True iff no later element exceeds an earlier one by more than ``t``.

    Equivalent to the O(n^2) all-pairs check; implemented with a running
    minimum of the prefix.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    seq = list(output_order)
    if not seq:
        raise ValueError("sequence must be nonempty")
    running_min = seq[0]
    for v in seq[1:]:
        if v > running_min + t:
            return False
        if v < running_min:
            running_min = v
    return True
