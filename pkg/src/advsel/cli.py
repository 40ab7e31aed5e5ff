"""Command-line front end: select / sort / bench / scheffe / report.

Exit codes: 0 success, 2 input or config error, 3 model violation detected
during the run (an adversary contradicted a forced comparison).
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from typing import Optional

from .adversary import ComparatorSession
from .algorithms import (combined_select, complete_tournament, modified_knockout,
                         quick_select, sequential_select)
from .core import Instance, RngSeed, is_t_sorted
from .generators import parse_generator
from .harness import (CSV_HEADER, TrialConfig, csv_row,
                      normalize_adversary, run_trials, _build_adversary)
from .report import bound_report
from .scheffe import (candidates_from_json, l1_distance, sample,
                      scheffe_quickselect, scheffe_tournament)
from .sorting import complete_sort, quick_sort

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VIOLATION = 3


class InputError(ValueError):
    pass


def _emit(record: dict, as_json: bool, order: Optional[list] = None) -> None:
    if as_json:
        print(json.dumps(record, sort_keys=True))
        return
    for key, val in record.items():
        if isinstance(val, float):
            val = format(val, "g")
        print(f"{key}: {val}")


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return secrets.randbits(62)


def _load_instance(args, rng):
    if getattr(args, "file", None):
        try:
            with open(args.file, "r", encoding="utf-8") as fh:
                return Instance.from_json(fh.read()), None
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            raise InputError(f"cannot load instance {args.file}: {exc}") from exc
    if getattr(args, "gen", None):
        return parse_generator(args.gen, rng)
    raise InputError("need --file or --gen")


def _adversary_spec(raw: Optional[str], have_construction: bool) -> dict:
    if raw is None:
        return {"kind": "construction"} if have_construction \
            else {"kind": "nonadaptive", "policy": "random"}
    raw = raw.strip()
    if raw.startswith("{"):
        return json.loads(raw)
    if raw.endswith(".json"):
        with open(raw, "r", encoding="utf-8") as fh:
            return json.load(fh)
    return normalize_adversary(raw)


_SELECTORS = {
    "compl": lambda sess, rng, eps: complete_tournament(sess, rng=rng),
    "seq": lambda sess, rng, eps: sequential_select(sess, rng=rng),
    "ko-mod": lambda sess, rng, eps: modified_knockout(sess, eps, rng=rng),
    "q-select": lambda sess, rng, eps: quick_select(sess, rng=rng),
    "comb": lambda sess, rng, eps: combined_select(sess, eps, rng=rng),
}

_SORTERS = {
    "compl-sort": lambda sess, rng: complete_sort(sess, rng=rng),
    "q-sort": lambda sess, rng: quick_sort(sess, rng=rng),
}


def _run_single(args, sorting: bool) -> int:
    seed = _resolve_seed(args)
    root = RngSeed(seed)
    instance, cgraph = _load_instance(args, root.generator(0))
    spec = _adversary_spec(args.adversary, cgraph is not None)
    adversary = _build_adversary(spec, instance, cgraph, root.generator(1))
    session = ComparatorSession(instance, adversary)
    rng = root.generator(2)
    if sorting:
        result = _SORTERS[args.algo](session, rng)
        order = list(result.order)
        values = [instance.values[i] for i in order]
        record = {
            "command": "sort", "algorithm": args.algo, "n": instance.n,
            "order": order, "values_in_order": values,
            "queries": result.queries,
            "sorted_within_2": is_t_sorted(values, 2.0),
            "seed": seed, "violations": session.violations,
        }
    else:
        result = _SELECTORS[args.algo](session, rng, args.epsilon)
        value = instance.values[result.winner]
        record = {
            "command": "select", "algorithm": args.algo, "n": instance.n,
            "winner": result.winner, "winner_value": value,
            "max_value": instance.max_value,
            "gap": instance.max_value - value,
            "queries": result.queries,
            "seed": seed, "violations": session.violations,
        }
    _emit(record, args.json)
    return EXIT_VIOLATION if session.violations else EXIT_OK


def _cmd_select(args) -> int:
    if args.algo not in _SELECTORS:
        raise InputError(f"--algo must be one of {tuple(_SELECTORS)}")
    return _run_single(args, sorting=False)


def _cmd_sort(args) -> int:
    if args.algo not in _SORTERS:
        raise InputError(f"--algo must be one of {tuple(_SORTERS)}")
    return _run_single(args, sorting=True)


def _cmd_bench(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = TrialConfig.from_json(fh.read())
    except (OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
        raise InputError(f"bad trial config: {exc}") from exc
    data = run_trials(config)
    summary = data.summary()
    adv = config.adversary if isinstance(config.adversary, str) \
        else json.dumps(config.adversary, sort_keys=True)
    inst_label = config.instance if isinstance(config.instance, str) else "custom"
    n = _peek_n(config)
    row = csv_row(config.algorithm, adv, n, config.t, config.epsilon, summary, True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(CSV_HEADER + "\n" + row + "\n")
    record = {
        "command": "bench", "algorithm": config.algorithm, "instance": inst_label,
        "n": n, "trials": summary.trials, "error_rate": summary.error_rate,
        "ci_lo": summary.error_ci95[0], "ci_hi": summary.error_ci95[1],
        "q_mean": summary.query_mean, "q_max": summary.query_max,
        "seed": config.seed,
    }
    _emit(record, args.json)
    return EXIT_OK


def _peek_n(config: TrialConfig) -> int:
    from .harness import _InstanceSource
    src = _InstanceSource(config.instance)
    inst, _ = src.build(RngSeed(config.seed).generator(0))
    return inst.n


def _cmd_scheffe(args) -> int:
    seed = _resolve_seed(args)
    root = RngSeed(seed)
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            p0, candidates = candidates_from_json(fh.read())
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise InputError(f"cannot load candidates {args.file}: {exc}") from exc
    samples = sample(p0, args.k, root.generator(0))
    if args.method == "tournament":
        sel = scheffe_tournament(candidates, samples, root.generator(1))
    else:
        sel = scheffe_quickselect(candidates, samples, root.generator(1))
    dists = [l1_distance(c, p0) for c in candidates]
    chosen = dists[sel.winner]
    best = min(dists)
    record = {
        "command": "scheffe", "method": args.method, "n": len(candidates),
        "k": args.k, "winner": sel.winner, "l1_to_p0": chosen,
        "min_l1": best, "ratio": chosen / best if best > 0 else float("inf"),
        "tests": sel.tests, "seed": seed,
    }
    _emit(record, args.json)
    return EXIT_OK


def _cmd_report(args) -> int:
    report = bound_report(seed=args.seed, out_dir=args.out, max_n=args.max_n,
                          scale=args.scale)
    print(report.text, end="")
    if args.out:
        print(f"written: {args.out}/bound_report.csv, {args.out}/bound_report.txt")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="advsel",
        description="maximum selection and sorting with adversarial comparators")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, sorting=False):
        p.add_argument("--file", help="instance JSON file")
        p.add_argument("--gen", help="generator spec, e.g. zeros:10, uniform01:100, "
                                     "lemma1:5, lemma2:5, seqhard:3,3, komodhard:3002")
        p.add_argument("--adversary", help="smaller-wins | larger-wins | "
                       "lower-index-wins | random | pivot-killer | inline JSON | "
                       "path to a .json spec (default: the construction's graph, "
                       "or 'random')")
        p.add_argument("--seed", type=int, help="master seed (echoed; random if omitted)")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("select", help="run one maximum-selection")
    add_common(p)
    p.add_argument("--algo", required=True,
                   help="compl | seq | ko-mod | q-select | comb")
    p.add_argument("--epsilon", type=float, default=0.1,
                   help="error budget for ko-mod/comb (default 0.1)")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("sort", help="run one sort")
    add_common(p, sorting=True)
    p.add_argument("--algo", required=True, help="compl-sort | q-sort")
    p.set_defaults(func=_cmd_sort)

    p = sub.add_parser("bench", help="Monte-Carlo trials from a config file")
    p.add_argument("--config", required=True, help="TrialConfig JSON (seed required)")
    p.add_argument("--out", help="write a one-row CSV here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("scheffe", help="density-estimation selection")
    p.add_argument("--file", required=True, help="candidates JSON "
                   '({"support": m, "candidates": [[...]], "p0": [...]})')
    p.add_argument("--k", type=int, required=True, help="sample count")
    p.add_argument("--method", choices=("tournament", "quickselect"),
                   default="quickselect")
    p.add_argument("--seed", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_scheffe)

    p = sub.add_parser("report", help="reproduce the bound table")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="directory for bound_report.{csv,txt}")
    p.add_argument("--max-n", type=int, default=2048)
    p.add_argument("--scale", type=float, default=1.0,
                   help="trial-count multiplier (1.0 = full desk scale)")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags already; normalize
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, ValueError, OSError, KeyError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
