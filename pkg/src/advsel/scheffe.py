"""Hypothesis selection for density estimation: the two-candidate Scheffe
test, the quadratic round-robin tournament, and the linear quick-select
composition.

The pairwise test is deterministic given the sample set, so a fixed sample
set induces a fixed tournament over the candidates; quick-select then runs
against it exactly as against a non-adaptive comparator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algorithms import quick_select

__all__ = [
    "DiscreteDistribution",
    "SampleSet",
    "ScheffeOutcome",
    "ScheffeSelection",
    "l1_distance",
    "sample",
    "scheffe_test",
    "scheffe_tournament",
    "scheffe_quickselect",
    "induced_tournament_matrix",
    "planted_suite",
    "candidates_to_json",
    "candidates_from_json",
]

_SUM_TOL = 1e-9


class DiscreteDistribution:
    """Probability vector over a finite support 0..m-1."""

    __slots__ = ("probs",)

    def __init__(self, probs):
        arr = np.asarray(probs, dtype=np.float64)
        if arr.ndim != 1 or len(arr) < 1:
            raise ValueError("probs must be a nonempty 1-d sequence")
        if (arr < 0).any():
            raise ValueError("probabilities must be non-negative")
        if abs(arr.sum() - 1.0) > _SUM_TOL:
            raise ValueError(f"probabilities sum to {arr.sum()!r}, not 1")
        arr = arr.copy()
        arr.flags.writeable = False
        self.probs = arr

    @property
    def support_size(self) -> int:
        return len(self.probs)

    def __eq__(self, other):
        return isinstance(other, DiscreteDistribution) and np.array_equal(self.probs, other.probs)

    def __repr__(self):
        return f"DiscreteDistribution({self.probs.tolist()})"


@dataclass(frozen=True)
class SampleSet:
    """Record of k i.i.d. draws, stored as support indices."""

    samples: np.ndarray
    k: int

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.int64))
        if len(self.samples) != self.k:
            raise ValueError("k must equal the number of samples")


@dataclass(frozen=True)
class ScheffeOutcome:
    """Result of one pairwise test; ``winner`` is 0 for the first argument,
    1 for the second."""

    winner: int
    set_mass_1: float
    set_mass_2: float
    empirical_mass: float


@dataclass(frozen=True)
class ScheffeSelection:
    winner: int   # index into the candidate list
    tests: int    # number of pairwise Scheffe tests performed


def _check_support(*dists: DiscreteDistribution):
    sizes = {d.support_size for d in dists}
    if len(sizes) != 1:
        raise ValueError(f"support sizes differ: {sorted(sizes)}")


def l1_distance(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    _check_support(p, q)
    return float(np.abs(p.probs - q.probs).sum())


def sample(p: DiscreteDistribution, k: int, rng: np.random.Generator) -> SampleSet:
    """k i.i.d. draws by inverse CDF over the support order."""
    if k < 0:
        raise ValueError("k must be non-negative")
    cdf = np.cumsum(p.probs)
    u = rng.random(k)
    idx = np.searchsorted(cdf, u, side="right")
    return SampleSet(np.minimum(idx, p.support_size - 1), k)


def scheffe_test(p1: DiscreteDistribution, p2: DiscreteDistribution,
                 samples: SampleSet) -> ScheffeOutcome:
    """Compare two candidates on the witness set S = {x : p1(x) > p2(x)}:
    whichever assigns S a mass closer to the empirical frequency wins,
    with ties going to the first argument."""
    _check_support(p1, p2)
    s_set = p1.probs > p2.probs
    m1 = float(p1.probs[s_set].sum())
    m2 = float(p2.probs[s_set].sum())
    if samples.k:
        if samples.samples.max() >= p1.support_size:
            raise ValueError("sample index outside the candidates' support")
        mu = float(s_set[samples.samples].mean())
    else:
        mu = 0.0
    winner = 0 if abs(m1 - mu) <= abs(m2 - mu) else 1
    return ScheffeOutcome(winner, m1, m2, mu)


class _ScheffeSession:
    """Adapter exposing the pairwise test through the comparator-session
    interface so selection algorithms run on candidates unchanged. Each
    unordered pair is evaluated in canonical (lower index first) order."""

    def __init__(self, candidates: Sequence[DiscreteDistribution], samples: SampleSet):
        self.candidates = list(candidates)
        self.samples = samples
        self.tests = 0

    @property
    def n_items(self) -> int:
        return len(self.candidates)

    @property
    def queries(self) -> int:
        return self.tests

    def announce_pivot(self, index):
        pass

    def query(self, i: int, j: int) -> int:
        a, b = (i, j) if i < j else (j, i)
        out = scheffe_test(self.candidates[a], self.candidates[b], self.samples)
        self.tests += 1
        return a if out.winner == 0 else b


def scheffe_tournament(candidates: Sequence[DiscreteDistribution],
                       samples: SampleSet, rng=None) -> ScheffeSelection:
    """Round-robin of pairwise tests; returns the candidate with the most
    wins (seeded-random tie-break). Theta(n^2 k) work."""
    n = len(candidates)
    if n == 0:
        raise ValueError("need at least one candidate")
    if rng is None:
        rng = np.random.default_rng()
    session = _ScheffeSession(candidates, samples)
    wins = [0] * n
    for a in range(n):
        for b in range(a + 1, n):
            wins[session.query(a, b)] += 1
    best = max(wins)
    maxers = [c for c in range(n) if wins[c] == best]
    winner = maxers[0] if len(maxers) == 1 else maxers[int(rng.integers(len(maxers)))]
    return ScheffeSelection(winner, session.tests)


def scheffe_quickselect(candidates: Sequence[DiscreteDistribution],
                        samples: SampleSet, rng=None) -> ScheffeSelection:
    """Quick-select over candidates with the Scheffe test as the comparator;
    expected Theta(n k) work since the induced tournament is fixed."""
    if len(candidates) == 0:
        raise ValueError("need at least one candidate")
    if samples.k < 1 and len(candidates) > 1:
        raise ValueError("need at least one sample")
    session = _ScheffeSession(candidates, samples)
    result = quick_select(session, rng=rng)
    return ScheffeSelection(result.winner, session.tests)


def induced_tournament_matrix(candidates: Sequence[DiscreteDistribution],
                              samples: SampleSet) -> np.ndarray:
    """The fixed orientation a sample set induces over all candidate pairs
    (entry [i, j] True iff i wins the canonical-order test against j)."""
    n = len(candidates)
    probs = np.stack([c.probs for c in candidates])
    if samples.k:
        counts = np.bincount(samples.samples, minlength=probs.shape[1])
        emp = counts / samples.k
    else:
        emp = np.zeros(probs.shape[1])
    matrix = np.zeros((n, n), dtype=bool)
    for a in range(n):
        s_sets = probs[a][None, :] > probs[a + 1:]          # (n-a-1, m)
        m1 = (s_sets * probs[a][None, :]).sum(axis=1)
        m2 = (s_sets * probs[a + 1:]).sum(axis=1)
        mu = (s_sets * emp[None, :]).sum(axis=1)
        a_wins = np.abs(m1 - mu) <= np.abs(m2 - mu)
        matrix[a, a + 1:] = a_wins
        matrix[a + 1:, a] = ~a_wins
    return matrix


def planted_suite(n_candidates: int, support_size: int, radius: float,
                  rng: np.random.Generator
                  ) -> tuple[DiscreteDistribution, list[DiscreteDistribution]]:
    """Synthetic benchmark: a random target p0, one candidate planted at an
    exact l1 radius from it, and random Dirichlet fillers (which land much
    farther away with overwhelming probability)."""
    if n_candidates < 1 or support_size < 2:
        raise ValueError("need n_candidates >= 1 and support_size >= 2")
    if not (0 < radius < 1):
        raise ValueError("radius must be in (0, 1)")
    p0 = rng.dirichlet(np.ones(support_size))
    order = np.argsort(p0)[::-1]
    planted = p0.copy()
    move = radius / 2
    left = move
    for atom in order[:support_size // 2]:
        d = min(planted[atom], left)
        planted[atom] -= d
        left -= d
        if left <= 0:
            break
    if left > 1e-12:
        raise ValueError(f"radius {radius} too large for this p0 draw")
    receivers = order[support_size // 2:]
    planted[receivers] += move / len(receivers)
    candidates = [DiscreteDistribution(rng.dirichlet(np.ones(support_size)))
                  for _ in range(n_candidates - 1)]
    slot = int(rng.integers(n_candidates))
    candidates.insert(slot, DiscreteDistribution(planted))
    return DiscreteDistribution(p0), candidates


def candidates_to_json(p0: DiscreteDistribution,
                       candidates: Sequence[DiscreteDistribution]) -> str:
    return json.dumps({
        "support": p0.support_size,
        "candidates": [c.probs.tolist() for c in candidates],
        "p0": p0.probs.tolist(),
    })


def candidates_from_json(text: str | dict) -> tuple[DiscreteDistribution,
                                                    list[DiscreteDistribution]]:
    obj = json.loads(text) if isinstance(text, str) else text
    support = int(obj["support"])
    p0 = DiscreteDistribution(obj["p0"])
    candidates = [DiscreteDistribution(c) for c in obj["candidates"]]
    for d in (p0, *candidates):
        if d.support_size != support:
            raise ValueError("candidate support does not match declared support")
    if not candidates:
        raise ValueError("candidate list is empty")
    return p0, candidates
