"""Command-line front end: ``kadlab {constants,route,experiment,verify}``.

Every emission starts with (or, for JSON, contains) an echo of the effective
configuration, the seed and the package version. Exit status is 0 on success,
1 when a verification check fails, and 2 for usage, configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .constants import constants_table
from .errors import ConfigError, KadlabError
from .idspace import NodeId, read_id_file
from .montecarlo.config import (
    K_RULES,
    MEASUREMENTS,
    MODELS,
    ExperimentConfig,
    config_from_mapping,
    parse_config_text,
)
from .montecarlo.experiment import results_csv, run_experiment
from .montecarlo.ids import SOURCES
from .network import build_network, route
from .trie import build_trie

SEED_ENV = "KADLAB_SEED"


class CliError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or not raw.strip():
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise CliError(f"{SEED_ENV}={raw!r} is not an integer") from None


def parse_k_range(text: str) -> list[int]:
    """'1..10', '3', '1,2,8' or a mix such as '1..4,8'."""
    ks: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = (int(p) for p in part.split("..", 1))
                ks.extend(range(lo, hi + 1))
            else:
                ks.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad k range {text!r}") from None
    if not ks:
        raise argparse.ArgumentTypeError("k range is empty")
    if min(ks) < 1:
        raise argparse.ArgumentTypeError("k must be at least 1")
    return ks


def _echo_lines(command: str, config: dict, seed) -> list[str]:
    return [
        f"# kadlab {__version__} {command}",
        f"# seed: {'none' if seed is None else seed}",
        "# config: " + json.dumps(config, sort_keys=True),
    ]


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc.strerror or exc}") from None


# -- constants ----------------------------------------------------------------------

def _render(value: float, precision: int) -> str:
    return f"{value:.{precision}g}"


def cmd_constants(args) -> int:
    rows = constants_table(args.k_range)
    echo = {"k_range": args.k_range, "precision": args.precision, "format": args.format}
    columns = ("c_k", "c_k_prime", "c_k_star")
    if args.format == "json":
        doc = {
            "format": "kadlab-constants/1",
            "version": __version__,
            "seed": None,
            "config": echo,
            "rows": [{"k": r.k, **{c: float(_render(getattr(r, c), args.precision)) for c in columns}}
                     for r in rows],
        }
        text = json.dumps(doc, indent=2) + "\n"
    elif args.format == "csv":
        buf = io.StringIO()
        buf.write("\n".join(_echo_lines("constants", echo, None)) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("k",) + columns)
        for r in rows:
            writer.writerow([r.k] + [_render(getattr(r, c), args.precision) for c in columns])
        text = buf.getvalue()
    else:
        lines = _echo_lines("constants", echo, None)
        width = args.precision + 6
        lines.append(f"{'k':>4}  {'c_k':<{width}}{'c_k_prime':<{width}}{'c_k_star':<{width}}".rstrip())
        for r in rows:
            cells = "".join(f"{_render(getattr(r, c), args.precision):<{width}}" for c in columns)
            lines.append(f"{r.k:>4}  {cells}".rstrip())
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


# -- route --------------------------------------------------------------------------

def _parse_id(text: str, d: int, what: str) -> NodeId:
    try:
        return NodeId.from_str(text, d)
    except ValueError as exc:
        raise CliError(f"bad {what} id: {exc}") from None


def cmd_route(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    ids = read_id_file(args.ids, d=args.d)
    if not ids:
        raise CliError(f"{args.ids} holds no ids")
    d = ids[0].d
    x = _parse_id(args.source, d, "source")
    y = _parse_id(args.target, d, "target")
    trie = build_trie(ids)
    if x not in trie:
        raise CliError(f"source {x.to_bin()} is not one of the ids in {args.ids}")
    network = build_network(trie, args.k, np.random.default_rng(np.random.SeedSequence(seed)))
    trace = route(network, x, y)
    echo = {"ids": str(args.ids), "n": trie.n, "d": d, "k": args.k,
            "source": x.to_bin(), "target": y.to_bin()}
    if args.format == "json":
        doc = {
            "format": "kadlab-trace/1",
            "version": __version__,
            "seed": seed,
            "config": echo,
            "hops": [
                {"t": t, "id": z.to_hex(), "lca_depth": depth, "subtree_size": size}
                for t, (z, depth, size) in enumerate(zip(trace.hops, trace.hop_depths,
                                                         trace.subtree_sizes))
            ],
            "T": trace.length,
        }
        text = json.dumps(doc, indent=2) + "\n"
    else:
        text = "\n".join(_echo_lines("route", echo, seed)) + "\n"
        text += "# hop\tid\tlca_depth\t|S_t|\n"
        text += trace.dump()
        text += f"T_xy = {trace.length}\n"
    _emit(text, args.out)
    return 0


# -- experiment ---------------------------------------------------------------------

_CONFIG_FLAGS = ("model", "id_source", "d", "k", "k_rule", "theta", "trials", "measurement",
                 "prefix", "fraction", "ids_file", "source", "target", "pairs")


def _experiment_configs(args) -> list[ExperimentConfig]:
    overrides = {key: getattr(args, key) for key in _CONFIG_FLAGS if getattr(args, key) is not None}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    mapping: dict = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise CliError(f"cannot read {args.config}: {exc.strerror or exc}") from None
        mapping = parse_config_text(text, source=args.config)
    # precedence: flags, then the file, then $KADLAB_SEED
    mapping.setdefault("master_seed", default_seed())
    mapping.update(overrides)
    base = config_from_mapping(mapping)
    configs = [base] if not args.n else [base.with_(n=n) for n in args.n]
    problems = []
    for c in configs:
        for p in c.problems():
            label = f"n={c.n}: {p}" if len(configs) > 1 else p
            if label not in problems:
                problems.append(label)
    if problems:
        raise ConfigError(problems)
    return configs


def _human_summary(result) -> str:
    s = result.summary
    ref = result.reference
    lines = [
        f"n={result.n} d={result.config['d']} k={result.k} trials={s['count']} "
        f"measurement={result.config['measurement']}",
        f"  mean T = {s['mean']:.4f}  var = {s['variance']:.4f}  "
        f"q50/q90/q99/max = {s['q50']:g}/{s['q90']:g}/{s['q99']:g}/{s['max']:g}",
    ]
    if result.normalized_mean is not None:
        ratio = result.normalized_mean / ref["value"]
        lines.append(f"  mean T / log n = {result.normalized_mean:.6f}   "
                     f"reference {ref['name']} = {ref['value']:.6f}   ratio = {ratio:.4f}")
    else:
        lines.append(f"  reference {ref['name']} = {ref['value']:.6f}")
    if "sup_prediction" in ref:
        lines.append(f"  predicted sup T -> 1/theta = {ref['sup_prediction']:g}")
    return "\n".join(lines)


def cmd_experiment(args) -> int:
    configs = _experiment_configs(args)
    results = [run_experiment(c, workers=args.workers) for c in configs]
    include = not args.summary_only

    if args.out_dir:
        out_dir = Path(args.out_dir)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            for r in results:
                r.write_json(out_dir / f"{r.config['measurement']}_n{r.n}.json", include)
            (out_dir / "summary.csv").write_text(results_csv(results))
        except OSError as exc:
            raise CliError(f"cannot write into {out_dir}: {exc.strerror or exc}") from None

    if args.format == "json":
        docs = [r.to_dict(include) for r in results]
        text = json.dumps(docs[0] if len(docs) == 1 else docs, indent=2, sort_keys=True) + "\n"
    elif args.format == "csv":
        text = "\n".join(_echo_lines("experiment", configs[0].as_dict(), configs[0].master_seed))
        text += "\n" + results_csv(results)
    else:
        blocks = []
        for c, r in zip(configs, results):
            blocks.append("\n".join(_echo_lines("experiment", c.as_dict(), c.master_seed)))
            blocks.append(_human_summary(r))
        text = "\n".join(blocks) + "\n"
    _emit(text, args.out)
    return 0


# -- verify -------------------------------------------------------------------------

def cmd_verify(args) -> int:
    from .verify import SUITES, run_suite

    seed = default_seed() if args.seed is None else args.seed
    suites = list(SUITES) if args.suite == "all" else [args.suite]
    reports = [run_suite(s, args.budget, seed) for s in suites]
    passed = all(r.passed for r in reports)
    if args.format == "json":
        doc = {"format": "kadlab-verify/1", "version": __version__, "seed": seed,
               "config": {"suite": args.suite, "budget": args.budget},
               "passed": passed, "reports": [r.as_dict() for r in reports]}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        lines = _echo_lines("verify", {"suite": args.suite, "budget": args.budget}, seed)
        for r in reports:
            for c in r.checks:
                lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name}")
            lines.append(f"suite {r.suite} (budget {r.budget}): {'pass' if r.passed else 'FAIL'}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0 if passed else 1


# -- parser -------------------------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer seed: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kadlab", allow_abbrev=False,
                                     description="Kademlia routing-time model: constants, "
                                                 "simulation and verification.")
    parser.add_argument("--version", action="version", version=f"kadlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", allow_abbrev=False, help="table of c_k, c_k', c_k*")
    p.add_argument("--k-range", type=parse_k_range, default=list(range(1, 11)),
                   help="e.g. 1..10 (default), 8, or 1..4,16")
    p.add_argument("--precision", type=_positive_int, default=10, help="significant digits")
    p.add_argument("--format", choices=("human", "csv", "json"), default="human")
    p.add_argument("--out", help="write here instead of stdout")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("route", allow_abbrev=False, help="build a network and trace one lookup")
    p.add_argument("--ids", required=True, help="id file, one binary or hex id per line")
    p.add_argument("-d", type=_positive_int, help="id length (needed for hex-only files)")
    p.add_argument("-k", type=_positive_int, required=True, help="bucket size")
    p.add_argument("-x", "--source", required=True, help="starting node (must be in the file)")
    p.add_argument("-y", "--target", required=True, help="lookup target (any d-bit id)")
    p.add_argument("--seed", type=_seed, help=f"network seed (default ${SEED_ENV} or 0)")
    p.add_argument("--format", choices=("human", "json"), default="human")
    p.add_argument("--out")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("experiment", allow_abbrev=False, help="run Monte-Carlo trials")
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("-n", "--n", type=_positive_int, nargs="+", help="one or more n (a sweep)")
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--id-source", dest="id_source", choices=SOURCES)
    p.add_argument("-d", "--d", type=_positive_int)
    p.add_argument("-k", "--k", type=_positive_int)
    p.add_argument("--k-rule", dest="k_rule", choices=K_RULES)
    p.add_argument("--theta", type=float)
    p.add_argument("--trials", type=_positive_int)
    p.add_argument("--measurement", choices=MEASUREMENTS)
    p.add_argument("--prefix")
    p.add_argument("--fraction", type=float)
    p.add_argument("--ids-file", dest="ids_file")
    p.add_argument("--source")
    p.add_argument("--target")
    p.add_argument("--pairs", type=_positive_int)
    p.add_argument("--seed", type=_seed, help=f"master seed (default ${SEED_ENV} or 0)")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--format", choices=("human", "csv", "json"), default="human")
    p.add_argument("--out", help="write the main emission here")
    p.add_argument("--out-dir", help="also write one JSON per n plus summary.csv here")
    p.add_argument("--summary-only", action="store_true", help="omit per-trial values from JSON")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("verify", allow_abbrev=False, help="run an invariant suite")
    p.add_argument("--suite", choices=("metric", "trie", "dominance", "tails", "constants",
                                       "convergence", "oracle", "all"), default="all")
    p.add_argument("--budget", type=_positive_int, help="trials or instances per check")
    p.add_argument("--seed", type=_seed)
    p.add_argument("--format", choices=("human", "json"), default="human")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"kadlab: config error: {problem}", file=sys.stderr)
        return 2
    except (CliError, KadlabError, OSError) as exc:
        print(f"kadlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
