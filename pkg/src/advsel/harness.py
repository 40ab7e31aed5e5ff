"""Monte-Carlo experiment engine: runs seeded independent trials of any
algorithm against any instance/adversary config, estimates error rates with
Wilson intervals, collects query statistics, and checks the quick-select
concentration bound.

Reproducibility contract: identical config (seed included) gives bitwise
identical results regardless of worker count, because every trial derives its
own generators from (seed, stream, trial-index) seed sequences.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import engine
from .adversary import (ComparatorSession, TournamentGraph,
                        adversary_from_spec)
from .algorithms import (combined_select, complete_tournament, modified_knockout,
                         quick_select, sequential_select)
from .core import Instance, is_t_sorted
from .generators import parse_generator
from .sorting import complete_sort, quick_sort

__all__ = [
    "TrialConfig",
    "TrialSummary",
    "TrialData",
    "ALGORITHM_IDS",
    "estimate",
    "run_trials",
    "check_concentration",
    "wilson_interval",
    "CSV_HEADER",
    "csv_row",
]

SELECTORS = ("compl", "seq", "ko-mod", "q-select", "comb")
SORTERS = ("compl-sort", "q-sort")
ALGORITHM_IDS = SELECTORS + SORTERS

ADVERSARY_SHORTHAND = {
    "larger-wins": {"kind": "nonadaptive", "policy": "larger-wins"},
    "smaller-wins": {"kind": "nonadaptive", "policy": "smaller-wins"},
    "lower-index-wins": {"kind": "nonadaptive", "policy": "lower-index-wins"},
    "random": {"kind": "nonadaptive", "policy": "random"},
    "pivot-killer": {"kind": "construction", "name": "pivot-killer"},
    # the graph that came with the instance's construction
    "construction": {"kind": "construction"},
}


def normalize_adversary(spec) -> dict:
    if isinstance(spec, str):
        try:
            return ADVERSARY_SHORTHAND[spec]
        except KeyError:
            raise ValueError(f"unknown adversary shorthand {spec!r}") from None
    if isinstance(spec, dict):
        return spec
    raise ValueError("adversary spec must be a name or a JSON object")


@dataclass(frozen=True)
class TrialConfig:
    """One Monte-Carlo experiment: algorithm, instance source, adversary spec,
    approximation slack, trial count, and the master seed."""

    algorithm: str
    instance: object           # generator string, {"file": ...}, or {"values": ...}
    adversary: object          # shorthand string or adversary spec object
    t: float = 2.0
    epsilon: Optional[float] = None
    trials: int = 1000
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHM_IDS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; "
                             f"expected one of {ALGORITHM_IDS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.t < 0:
            raise ValueError("t must be >= 0")
        normalize_adversary(self.adversary)
        if self.algorithm in ("ko-mod", "comb") and self.epsilon is None:
            raise ValueError(f"{self.algorithm} needs epsilon")

    @classmethod
    def from_json(cls, text: str | dict) -> "TrialConfig":
        obj = json.loads(text) if isinstance(text, str) else dict(text)
        if "seed" not in obj:
            raise ValueError("trial config must carry an explicit seed")
        known = {f for f in cls.__dataclass_fields__}
        extra = set(obj) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**obj)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm, "instance": self.instance,
            "adversary": self.adversary, "t": self.t, "epsilon": self.epsilon,
            "trials": self.trials, "seed": self.seed, "stream": self.stream,
        }


@dataclass(frozen=True)
class TrialSummary:
    trials: int
    error_rate: float
    error_ci95: tuple[float, float]
    query_mean: float
    query_max: float
    query_quantiles: dict
    wall_time: float


@dataclass
class TrialData:
    """Raw per-trial outcomes (in trial order)."""

    errors: np.ndarray          # bool: output failed the t check
    queries: np.ndarray         # int per trial
    round_sizes: list           # per trial list of field sizes (comb only)
    wall_time: float

    def summary(self) -> TrialSummary:
        trials = len(self.errors)
        err = int(self.errors.sum())
        qs = self.queries.astype(np.float64)
        quantiles = dict(zip((0.5, 0.9, 0.99), np.quantile(qs, (0.5, 0.9, 0.99))))
        return TrialSummary(
            trials=trials,
            error_rate=err / trials,
            error_ci95=wilson_interval(err, trials),
            query_mean=float(qs.mean()),
            query_max=float(qs.max()),
            query_quantiles=quantiles,
            wall_time=self.wall_time,
        )


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054
                    ) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        return (0.0, 1.0)
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    # rounding can push a boundary just past p; the interval always contains p
    return (min(p, max(0.0, center - half)), max(p, min(1.0, center + half)))


class _InstanceSource:
    """Builds the per-trial instance (and construction graph, when the source
    is one of the named constructions)."""

    def __init__(self, cfg):
        self.cfg = cfg
        if isinstance(cfg, str):
            name = cfg.partition(":")[0]
            self.kind = "generator"
            self.static = name in ("zeros", "distinct", "seqhard")
        elif isinstance(cfg, dict) and "file" in cfg:
            self.kind = "file"
            self.static = True
        elif isinstance(cfg, dict) and "values" in cfg:
            self.kind = "inline"
            self.static = True
        else:
            raise ValueError(f"bad instance source {cfg!r}")

    def build(self, rng) -> tuple[Instance, Optional[TournamentGraph]]:
        if self.kind == "generator":
            return parse_generator(self.cfg, rng)
        if self.kind == "file":
            with open(self.cfg["file"], "r", encoding="utf-8") as fh:
                return Instance.from_json(fh.read()), None
        return Instance.from_json(self.cfg), None


def _build_adversary(spec: dict, instance, construction_graph, rng):
    if spec.get("kind") == "construction" and "name" not in spec:
        if construction_graph is None:
            raise ValueError("adversary 'construction' needs a construction instance")
        return construction_graph
    return adversary_from_spec(spec, instance, rng)


def _adversary_static(spec: dict, instance_static: bool) -> bool:
    if not instance_static:
        return False
    kind = spec.get("kind")
    if kind == "nonadaptive":
        return spec.get("policy") not in ("random", "seeded-random") or "seed" in spec
    if kind == "explicit":
        return True
    if kind == "construction":
        if spec.get("name") == "pivot-killer":
            return not (spec.get("params") or {}).get("memoized")
        return True
    return False


def _run_canonical(algorithm, session, rng, epsilon, record_sizes):
    if algorithm == "compl":
        return complete_tournament(session, rng=rng).winner
    if algorithm == "seq":
        return sequential_select(session, rng=rng).winner
    if algorithm == "ko-mod":
        return modified_knockout(session, epsilon, rng=rng).winner
    if algorithm == "q-select":
        return quick_select(session, rng=rng).winner
    if algorithm == "comb":
        return combined_select(session, epsilon, rng=rng,
                               record_sizes=record_sizes).winner
    if algorithm == "compl-sort":
        return complete_sort(session, rng=rng).order
    if algorithm == "q-sort":
        return quick_sort(session, rng=rng).order
    raise AssertionError(algorithm)


def _run_engine(algorithm, cmp, rng, epsilon, record_sizes):
    if algorithm == "compl":
        return engine.complete_tournament_fast(cmp, None, rng)
    if algorithm == "ko-mod":
        return engine.modified_knockout_fast(cmp, epsilon, None, rng)
    if algorithm == "q-select":
        return engine.quick_select_fast(cmp, None, rng)
    if algorithm == "comb":
        return engine.combined_select_fast(cmp, epsilon, None, rng,
                                           record_sizes=record_sizes)
    if algorithm == "compl-sort":
        return engine.complete_sort_fast(cmp, None, rng)
    if algorithm == "q-sort":
        return engine.quick_sort_fast(cmp, None, rng)
    return None


ENGINE_ALGORITHMS = ("compl", "ko-mod", "q-select", "comb", "compl-sort", "q-sort")


def _trial_block(config: TrialConfig, lo: int, hi: int,
                 collect_sizes: bool, use_engine: bool = True):
    """Run trials lo..hi-1 and return (errors, queries, round_sizes)."""
    source = _InstanceSource(config.instance)
    adv_spec = normalize_adversary(config.adversary)
    is_sort = config.algorithm in SORTERS
    static_instance = source.static
    static_adversary = _adversary_static(adv_spec, static_instance)
    cached_instance = cached_graph = cached_adv = None

    errors = np.zeros(hi - lo, dtype=bool)
    queries = np.zeros(hi - lo, dtype=np.int64)
    all_sizes: list = []

    def sub_rng(t: int, sub: int) -> np.random.Generator:
        # (seed, stream, trial, substream): order-independent derivation,
        # built lazily because seeding dominates cheap trials
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(
            entropy=config.seed, spawn_key=(config.stream, t, sub))))

    for t in range(lo, hi):
        if static_instance and cached_instance is not None:
            instance, cgraph = cached_instance, cached_graph
        else:
            instance, cgraph = source.build(sub_rng(t, 0))
            if static_instance:
                cached_instance, cached_graph = instance, cgraph
        if static_adversary and cached_adv is not None:
            adversary = cached_adv
        else:
            adversary = _build_adversary(adv_spec, instance, cgraph, sub_rng(t, 1))
            if static_adversary:
                cached_adv = adversary
        alg_rng = sub_rng(t, 2)
        sizes: Optional[list] = [] if collect_sizes else None

        cmp = engine.comparator_for(instance, adversary) if use_engine else None
        if cmp is not None and config.algorithm in ENGINE_ALGORITHMS:
            out, q = _run_engine(config.algorithm, cmp, alg_rng, config.epsilon, sizes)
        else:
            session = ComparatorSession(instance, adversary, record=False)
            out = _run_canonical(config.algorithm, session, alg_rng,
                                 config.epsilon, sizes)
            q = session.queries
        k = t - lo
        queries[k] = q
        if is_sort:
            errors[k] = not is_t_sorted([instance.values[i] for i in out], config.t)
        else:
            errors[k] = instance.values[int(out)] < instance.max_value - config.t
        if collect_sizes:
            all_sizes.append(sizes)
    return errors, queries, all_sizes


def _worker(args):
    config_dict, lo, hi, collect_sizes, use_engine = args
    cfg = TrialConfig(**config_dict)
    return _trial_block(cfg, lo, hi, collect_sizes, use_engine)


def _worker_count() -> int:
    raw = os.environ.get("ADVSEL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_trials(config: TrialConfig, collect_sizes: bool = False,
               use_engine: bool = True) -> TrialData:
    """Execute all trials of a config. Honors ADVSEL_THREADS for process
    parallelism; results are identical for any worker count."""
    start = time.perf_counter()
    workers = min(_worker_count(), config.trials)
    if workers <= 1 or config.trials < 4 * workers:
        errors, queries, sizes = _trial_block(config, 0, config.trials,
                                              collect_sizes, use_engine)
    else:
        bounds = np.linspace(0, config.trials, workers + 1, dtype=int)
        jobs = [(config.to_dict(), int(bounds[w]), int(bounds[w + 1]),
                 collect_sizes, use_engine) for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_worker, jobs))
        errors = np.concatenate([p[0] for p in parts])
        queries = np.concatenate([p[1] for p in parts])
        sizes = [s for p in parts for s in p[2]]
    return TrialData(errors=errors, queries=queries, round_sizes=sizes,
                     wall_time=time.perf_counter() - start)


def estimate(config: TrialConfig) -> TrialSummary:
    """Error rate (with Wilson 95% CI) and query statistics over independent
    seeded trials."""
    return run_trials(config).summary()


@dataclass(frozen=True)
class ConcentrationRow:
    k: float
    empirical: float
    bound: float
    stderr: float
    ok: bool


def check_concentration(n: int, k_values, trials: int, adversary_spec,
                        seed: int) -> list[ConcentrationRow]:
    """Empirical quick-select tail Pr(Q > kn) against the analytic bound
    e^{-(k-k') ln k'} with k' = max(e, k/2); flags any tail exceeding its
    bound by more than 3 binomial standard errors. Non-adaptive only."""
    spec = normalize_adversary(adversary_spec)
    if spec.get("kind") == "construction" and spec.get("name") == "pivot-killer":
        raise ValueError("the concentration bound holds for non-adaptive "
                         "adversaries only")
    config = TrialConfig(algorithm="q-select", instance=f"zeros:{n}",
                         adversary=spec, t=2.0, trials=trials, seed=seed)
    data = run_trials(config)
    rows = []
    for k in k_values:
        k = float(k)
        kp = max(math.e, k / 2.0)
        bound = math.exp(-(k - kp) * math.log(kp))
        empirical = float((data.queries > k * n).mean())
        stderr = math.sqrt(min(bound, 1.0) * max(1.0 - bound, 0.0) / trials)
        rows.append(ConcentrationRow(k=k, empirical=empirical, bound=bound,
                                     stderr=stderr,
                                     ok=empirical <= bound + 3 * stderr))
    return rows


CSV_HEADER = ("algorithm,adversary,n,t,epsilon,trials,error_rate,ci_lo,ci_hi,"
              "q_mean,q_p50,q_p90,q_p99,q_max,pass")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


def csv_row(algorithm: str, adversary: str, n: int, t: float,
            epsilon: Optional[float], summary: TrialSummary, ok: bool) -> str:
    qq = summary.query_quantiles
    fields = [algorithm, adversary, n, t, epsilon, summary.trials,
              summary.error_rate, summary.error_ci95[0], summary.error_ci95[1],
              summary.query_mean, qq[0.5], qq[0.9], qq[0.99], summary.query_max,
              "true" if ok else "false"]
    return ",".join(_fmt(f) for f in fields)
