"""Comparator implementations: frozen tournament graphs, adaptive strategies,
and the named hard constructions, all queried through one session interface.

A non-adaptive adversary is a complete orientation of all index pairs, fixed
before the first query. An adaptive strategy decides each answer online from
the query history (plus an optional pivot hint). Either way, pairs whose value
gap exceeds delta are forced: the session returns the larger value's index no
matter what the adversary says, and counts the disagreement as a model
violation.
"""

from __future__ import annotations

from typing import Optional, Protocol, Union, runtime_checkable

import numpy as np

from .core import Instance, InvalidQueryError, QueryLog, RngSeed, forced_winner

__all__ = [
    "TournamentGraph",
    "AdaptiveStrategy",
    "PivotKiller",
    "MemoizedStrategy",
    "ComparatorSession",
    "AdversaryProtocolError",
    "NONADAPTIVE_POLICIES",
    "build_nonadaptive",
    "lemma_one_construction",
    "lemma_two_construction",
    "sequential_hard_instance",
    "komod_hard_instance",
    "adversary_from_spec",
]

NONADAPTIVE_POLICIES = ("larger-wins", "smaller-wins", "lower-index-wins", "random")

# Dense-matrix graphs get unwieldy past this size.
MAX_CONSTRUCTION_SIZE = 4096


class AdversaryProtocolError(RuntimeError):
    """An adversary returned an index outside the queried pair."""


class TournamentGraph:
    """A complete orientation of all index pairs, frozen at construction.

    ``matrix[i, j]`` is True iff i beats j. Exactly one of ``matrix[i, j]``
    and ``matrix[j, i]`` holds for i != j; the diagonal is False.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix: np.ndarray, check: bool = True):
        matrix = np.asarray(matrix, dtype=bool)
        if check:
            n = matrix.shape[0]
            if matrix.ndim != 2 or matrix.shape != (n, n):
                raise ValueError("orientation matrix must be square")
            if matrix.diagonal().any():
                raise ValueError("no self-edges allowed")
            both = matrix & matrix.T
            neither = ~(matrix | matrix.T) & ~np.eye(n, dtype=bool)
            if both.any() or neither.any():
                raise ValueError("matrix must orient every pair exactly once")
        matrix.flags.writeable = False  # frozen once constructed
        self.matrix = matrix

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def winner(self, i: int, j: int) -> int:
        return i if self.matrix[i, j] else j

    def out_degrees(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def is_valid_for(self, instance: Instance) -> bool:
        if instance.n != self.n:
            return False
        diff = instance.values_array[:, None] - instance.values_array[None, :]
        # every pair with gap > delta must be oriented toward the larger value
        return not ((diff > instance.delta) & ~self.matrix).any()

    def validate_for(self, instance: Instance) -> "TournamentGraph":
        if instance.n != self.n:
            raise ValueError(f"graph has {self.n} nodes, instance has {instance.n}")
        diff = instance.values_array[:, None] - instance.values_array[None, :]
        bad = np.argwhere((diff > instance.delta) & ~self.matrix)
        if len(bad):
            i, j = bad[0]
            raise ValueError(
                f"forced pair misoriented: {j} beats {i} but value gap "
                f"{instance.values[int(i)] - instance.values[int(j)]:g} > delta"
            )
        return self

    @classmethod
    def from_edges(cls, n: int, edges) -> "TournamentGraph":
        """Build from an explicit edge list of (i, j, winner) triples."""
        matrix = np.zeros((n, n), dtype=bool)
        seen = np.zeros((n, n), dtype=bool)
        for i, j, w in edges:
            i, j, w = int(i), int(j), int(w)
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"bad edge pair ({i}, {j})")
            if w not in (i, j):
                raise ValueError(f"winner {w} not in pair ({i}, {j})")
            if seen[i, j]:
                raise ValueError(f"pair ({i}, {j}) specified twice")
            seen[i, j] = seen[j, i] = True
            matrix[w, i if w == j else j] = True
        if not seen[~np.eye(n, dtype=bool)].all():
            raise ValueError("edge list must cover every unordered pair")
        return cls(matrix)

    def edges(self):
        for i in range(self.n):
            for j in range(i + 1, self.n):
                yield (i, j, i if self.matrix[i, j] else j)


@runtime_checkable
class AdaptiveStrategy(Protocol):
    """Decision rule of an adaptive adversary.

    ``decide`` sees the instance, the queried pair, the full log so far, and
    the pivot hint (the index the current round is pivoting on, or None).
    It must return one of the two queried indices; on forced pairs the
    session overrides wrong answers anyway.
    """

    def decide(self, instance: Instance, i: int, j: int, log: QueryLog,
               pivot: Optional[int]) -> int: ...


class PivotKiller:
    """Adaptive strategy that declares the announced pivot the loser of every
    free query it appears in. Free queries not involving the pivot go to the
    lower index; forced queries obey the model."""

    def decide(self, instance, i, j, log, pivot):
        w = forced_winner(instance, i, j)
        if w is not None:
            return w
        if pivot == i:
            return j
        if pivot == j:
            return i
        return min(i, j)


class MemoizedStrategy:
    """Wrapper forcing an adaptive strategy to stay self-consistent: the first
    answer for each unordered pair is replayed on repeat queries."""

    def __init__(self, strategy):
        self.strategy = strategy
        self._memo: dict[tuple[int, int], int] = {}

    def decide(self, instance, i, j, log, pivot):
        key = (i, j) if i < j else (j, i)
        if key in self._memo:
            return self._memo[key]
        w = self.strategy.decide(instance, i, j, log, pivot)
        self._memo[key] = w
        return w


Adversary = Union[TournamentGraph, AdaptiveStrategy]


class ComparatorSession:
    """Query oracle binding an instance to one adversary.

    Enforces forced outcomes, logs every query, and counts queries. Answers
    from the adversary that disagree with a forced outcome are overridden and
    tallied in ``violations``. Single-owner: not safe for concurrent queries.
    """

    def __init__(self, instance: Instance, adversary: Adversary, record: bool = True):
        self.instance = instance
        self.adversary = adversary
        self.log = QueryLog(recording=record)
        self.violations = 0
        self._pivot: Optional[int] = None
        self._values = instance.values
        self._delta = instance.delta
        self._n = instance.n
        if isinstance(adversary, TournamentGraph):
            if adversary.n != instance.n:
                raise ValueError("graph size does not match instance")
            self._matrix = adversary.matrix
        else:
            self._matrix = None

    @property
    def n_items(self) -> int:
        return self._n

    @property
    def queries(self) -> int:
        return self.log.count

    def announce_pivot(self, index: Optional[int]) -> None:
        """Side channel telling adaptive adversaries which item the current
        round pivots on (None clears it)."""
        self._pivot = index

    def query(self, i: int, j: int) -> int:
        if i == j:
            raise InvalidQueryError("cannot compare an index with itself")
        if not (0 <= i < self._n and 0 <= j < self._n):
            raise InvalidQueryError(f"indices ({i}, {j}) out of range for n={self._n}")
        if self._matrix is not None:
            answer = i if self._matrix[i, j] else j
        else:
            answer = self.adversary.decide(self.instance, i, j, self.log, self._pivot)
            if answer != i and answer != j:
                raise AdversaryProtocolError(
                    f"adversary answered {answer} for pair ({i}, {j})")
        vi, vj = self._values[i], self._values[j]
        gap = vi - vj
        if gap > self._delta or -gap > self._delta:
            want = i if gap > 0 else j
            if answer != want:
                self.violations += 1
                answer = want
        self.log.append(i, j, answer)
        return answer


def _pair_masks(instance: Instance):
    v = instance.values_array
    diff = v[:, None] - v[None, :]
    off = ~np.eye(instance.n, dtype=bool)
    forced = diff > instance.delta
    free = (np.abs(diff) <= instance.delta) & off
    return diff, forced, free


def build_nonadaptive(instance: Instance, free_edge_policy: str,
                      rng=None) -> TournamentGraph:
    """Complete, valid, frozen graph with free pairs oriented per policy.

    Policies: ``larger-wins`` / ``smaller-wins`` (value ties go to the lower
    index), ``lower-index-wins``, and ``random`` (every free pair gets an
    independent fair coin, drawn eagerly so the graph is fixed before any
    query). ``smaller-wins`` realizes the min-on-ties adversary. ``rng`` may
    be a Generator, an RngSeed, or a plain seed; only ``random`` uses it.
    """
    policy = "random" if free_edge_policy == "seeded-random" else free_edge_policy
    if policy not in NONADAPTIVE_POLICIES:
        raise ValueError(f"unknown policy {free_edge_policy!r}")
    if rng is not None and not isinstance(rng, np.random.Generator):
        rng = _seed_rng(rng)
    n = instance.n
    diff, forced, free = _pair_masks(instance)
    idx = np.arange(n)
    lower = idx[:, None] < idx[None, :]
    if policy == "larger-wins":
        pref = (diff > 0) | ((diff == 0) & lower)
    elif policy == "smaller-wins":
        pref = (diff < 0) | ((diff == 0) & lower)
    elif policy == "lower-index-wins":
        pref = lower
    else:
        if rng is None:
            raise ValueError("random policy needs a generator")
        coin = rng.integers(0, 2, size=(n, n), dtype=np.uint8).view(bool)
        pref = (lower & coin) | (~lower & ~coin.T)
    return TournamentGraph(forced | (free & pref), check=False)


def _near_regular(group: int) -> np.ndarray:
    """Tournament on ``group`` nodes with out-degrees as equal as possible:
    node a beats a+1 .. a+floor((g-1)/2) cyclically, and for even g the
    antipodal pair goes to the lower position."""
    g = group
    if g == 0:
        return np.zeros((0, 0), dtype=bool)
    h = (g - 1) // 2
    pos = np.arange(g)
    dist = (pos[None, :] - pos[:, None]) % g
    beats = (dist >= 1) & (dist <= h)
    if g % 2 == 0:
        beats |= (dist == g // 2) & (pos[:, None] < g // 2)
    return beats


def _require_odd(n: int) -> int:
    n = int(n)
    if n < 3 or n % 2 == 0:
        raise ValueError(f"construction needs odd n >= 3, got {n}")
    if n > MAX_CONSTRUCTION_SIZE:
        raise ValueError(f"n={n} exceeds construction size cap {MAX_CONSTRUCTION_SIZE}")
    return n


def _seed_rng(seed) -> np.random.Generator:
    if seed is None:
        return RngSeed(0).generator()
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, RngSeed):
        return seed.generator()
    return RngSeed(int(seed)).generator()


def lemma_one_construction(n: int, seed=None) -> tuple[Instance, TournamentGraph]:
    """Regular tournament over a hidden permutation of (1, 0, ..., 0).

    Every index beats the next (n-1)/2 indices cyclically, so all out-degrees
    equal (n-1)/2; with all gaps <= 1 every orientation is legal, and no
    algorithm can tell the single 1 apart from the 0s.
    """
    n = _require_odd(n)
    rng = _seed_rng(seed)
    values = np.zeros(n)
    values[int(rng.integers(n))] = 1.0
    return Instance(tuple(values)), TournamentGraph(_near_regular(n), check=False)


def lemma_two_construction(n: int, seed=None) -> tuple[Instance, TournamentGraph]:
    """Regular tournament over a hidden permutation of (2, 1^m, 0^m) in which
    the 2 loses to every 1, m = (n-1)/2.

    Built on a cycle ordered (2, 0^m, 1^m) so the circulant's forced edges
    (2 over every 0) land correctly and every 1 has the 2 in its out-fan,
    then relabeled by a seeded permutation.
    """
    n = _require_odd(n)
    m = (n - 1) // 2
    rng = _seed_rng(seed)
    canon_values = np.concatenate(([2.0], np.zeros(m), np.ones(m)))
    canon = _near_regular(n)
    perm = rng.permutation(n)  # canonical position p becomes index perm[p]
    matrix = np.zeros((n, n), dtype=bool)
    matrix[np.ix_(perm, perm)] = canon
    values = np.empty(n)
    values[perm] = canon_values
    return Instance(tuple(values)), TournamentGraph(matrix, check=False)


def sequential_hard_instance(r: int, s: int) -> tuple[Instance, TournamentGraph]:
    """Layered instance of n = r^s values (one s, then r^(s-m) - r^(s-m-1)
    copies of each m < s) paired with the min-on-ties adversary, on which
    sequential selection almost always walks down to a 0."""
    r, s = int(r), int(s)
    if r < 2 or s < 1:
        raise ValueError("need r >= 2 and s >= 1")
    n = r ** s
    if n > MAX_CONSTRUCTION_SIZE:
        raise ValueError(f"r^s = {n} exceeds construction size cap {MAX_CONSTRUCTION_SIZE}")
    values = np.empty(n)
    values[0] = s
    for m in range(s - 1, -1, -1):
        values[r ** (s - m - 1): r ** (s - m)] = m
    inst = Instance(tuple(values))
    return inst, build_nonadaptive(inst, "smaller-wins")


def komod_hard_instance(n: int, seed=None) -> tuple[Instance, TournamentGraph]:
    """Hidden permutation of {3, 2^g, 1^g, 0^g, 0*} (g = (n-2)/3) with the
    orientation that defeats the modified knock-out's 3-approximation:
    all 2s and all plain 0s lose to all 1s, 3 loses to all 2s, and the
    distinguished 0* beats every 1 and every plain 0.

    Ties inside each equal-value group are a near-regular tournament rather
    than lower-index-wins: a single dominant 1 would otherwise out-win 0* in
    the final round-robin and the construction would lose its teeth.
    """
    n = int(n)
    if n < 5 or (n - 2) % 3 != 0:
        raise ValueError(f"need n - 2 divisible by 3 and n >= 5, got {n}")
    if n > MAX_CONSTRUCTION_SIZE:
        raise ValueError(f"n={n} exceeds construction size cap {MAX_CONSTRUCTION_SIZE}")
    rng = _seed_rng(seed)
    canon_values, canon = _komod_canonical(n)
    perm = rng.permutation(n)
    matrix = np.zeros((n, n), dtype=bool)
    matrix[np.ix_(perm, perm)] = canon
    values = np.empty(n)
    values[perm] = canon_values
    return Instance(tuple(values)), TournamentGraph(matrix, check=False)


_komod_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _komod_canonical(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n in _komod_cache:
        return _komod_cache[n]
    g = (n - 2) // 3
    # canonical order: [3] [2]*g [1]*g [0]*g [0*]
    canon_values = np.concatenate(([3.0], np.full(g, 2.0), np.ones(g), np.zeros(g), [0.0]))
    sl3 = slice(0, 1)
    sl2 = slice(1, 1 + g)
    sl1 = slice(1 + g, 1 + 2 * g)
    sl0 = slice(1 + 2 * g, 1 + 3 * g)
    star = n - 1

    canon = np.zeros((n, n), dtype=bool)
    canon[sl3, sl1] = True                      # forced, gap 2
    canon[sl3, sl0] = True                      # forced, gap 3
    canon[sl3, star] = True                     # forced, gap 3
    canon[sl2, sl3] = True                      # 3 loses to all 2s (free)
    canon[sl2, sl0] = True                      # forced, gap 2
    canon[sl2, star] = True                     # forced, gap 2
    canon[sl1, sl2] = True                      # all 2s lose to all 1s (free)
    canon[sl1, sl0] = True                      # all plain 0s lose to all 1s (free)
    canon[star, sl1] = True                     # 0* beats every 1 (free)
    canon[star, sl0] = True                     # 0* beats every plain 0 (free)
    nr = _near_regular(g)
    for sl in (sl2, sl1, sl0):
        canon[sl, sl] = nr
    if len(_komod_cache) > 4:
        _komod_cache.clear()
    _komod_cache[n] = (canon_values, canon)
    return canon_values, canon


CONSTRUCTIONS = ("lemma1", "lemma2", "seq-hard", "komod-hard", "pivot-killer")


def adversary_from_spec(spec: dict, instance: Instance,
                        rng: Optional[np.random.Generator] = None) -> Adversary:
    """Resolve an adversary spec (the JSON wire format) against an instance.

    Construction graphs are rebuilt from their params and must reproduce the
    given instance's values; explicit edge lists are validated against it.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("adversary spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "nonadaptive":
        policy = spec.get("policy", "random")
        if "seed" in spec and spec["seed"] is not None:
            rng = RngSeed(int(spec["seed"])).generator()
        if policy in ("random", "seeded-random") and rng is None:
            raise ValueError("random policy needs a 'seed' in the spec or a generator")
        return build_nonadaptive(instance, policy, rng)
    if kind == "construction":
        name = spec.get("name")
        params = spec.get("params", {}) or {}
        if name == "pivot-killer":
            strategy: Adversary = PivotKiller()
            if params.get("memoized"):
                strategy = MemoizedStrategy(strategy)
            return strategy
        if name not in CONSTRUCTIONS:
            raise ValueError(f"unknown construction {name!r}")
        built_inst, graph = build_construction(name, params)
        if built_inst.values != instance.values or built_inst.delta != instance.delta:
            raise ValueError(
                f"construction {name} with params {params} does not reproduce "
                "the supplied instance")
        return graph
    if kind == "explicit":
        graph = TournamentGraph.from_edges(instance.n, spec["edges"])
        return graph.validate_for(instance)
    raise ValueError(f"unknown adversary kind {kind!r}")


def build_construction(name: str, params: dict) -> tuple[Instance, TournamentGraph]:
    """Instantiate a named hard construction from its JSON params."""
    if name == "lemma1":
        return lemma_one_construction(params["n"], params.get("seed"))
    if name == "lemma2":
        return lemma_two_construction(params["n"], params.get("seed"))
    if name == "seq-hard":
        return sequential_hard_instance(params["r"], params["s"])
    if name == "komod-hard":
        return komod_hard_instance(params["n"], params.get("seed"))
    raise ValueError(f"unknown construction {name!r}")
