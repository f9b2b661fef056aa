"""Reproducible batches of routing-time trials.

Seeding: every random stream is a ``numpy.random.SeedSequence`` whose entropy is
the master seed and whose spawn key names the stream:

* ``(0,)``        the fixed identifier set of the deterministic-ids model
* ``(1, trial)``  everything drawn inside trial number ``trial``
* ``(2, j)``      auxiliary stream j used by comparison drivers

A trial therefore sees the same numbers no matter which worker runs it or in
what order, so splitting trials across processes cannot change the result.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..constants import constant, g_of_k
from ..errors import ConfigError, MissingNodeError
from ..idspace import NodeId, polar_opposite
from ..network import _route_values, build_network, simulate_routing_process
from ..trie import IdTrie
from .config import ExperimentConfig
from .ids import generate_values, random_values
from .samplers import sample_t_n

FORMAT_TAG = "kadlab-result/1"

# sup over all targets is exhaustive up to this d
FULL_TARGET_D = 12
EXTRA_TARGETS = 1024


def trial_seed(master_seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(1, trial))


def ids_seed(master_seed: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(0,))


def aux_seed(master_seed: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(2, stream))


def summarize(values) -> dict:
    a = np.asarray(values, dtype=float)
    q50, q90, q99 = np.quantile(a, [0.5, 0.9, 0.99])
    return {
        "count": int(a.size),
        "mean": float(a.mean()),
        "variance": float(a.var(ddof=1)) if a.size > 1 else 0.0,
        "q50": float(q50),
        "q90": float(q90),
        "q99": float(q99),
        "max": float(a.max()),
    }


def reference_for(config: ExperimentConfig, k: int) -> dict:
    m = config.measurement
    if m in ("t_polar", "t_n"):
        ref = {"name": "1/g(k)", "value": 1.0 / g_of_k(k)}
    elif m == "t_sup_y":
        ref = {"name": "c_k'", "value": constant(k, 1)}
    elif m == "t_sup_xy":
        ref = {"name": "c_k*", "value": constant(k, 2)}
    else:
        ref = {"name": "c_k = 1/H_k", "value": constant(k, 0)}
    if config.k_rule == "n_pow":
        ref["sup_prediction"] = 1.0 / config.theta
    return ref


@dataclass
class ExperimentResult:
    config: dict
    k: int
    n: int
    values: list
    summary: dict
    normalized_mean: float | None
    reference: dict
    extras: dict = field(default_factory=dict)
    seed: int = 0
    version: str = __version__
    format: str = FORMAT_TAG

    def to_dict(self, include_trials: bool = True) -> dict:
        out = asdict(self)
        if not include_trials:
            out.pop("values")
            out.pop("extras")
        return out

    def to_json(self, include_trials: bool = True) -> str:
        return json.dumps(self.to_dict(include_trials), indent=2, sort_keys=True) + "\n"

    def write_json(self, path, include_trials: bool = True) -> None:
        Path(path).write_text(self.to_json(include_trials))

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentResult:
        if data.get("format") != FORMAT_TAG:
            raise ValueError(f"unsupported result format {data.get('format')!r}")
        data = dict(data)
        data.setdefault("values", [])
        data.setdefault("extras", {})
        return cls(**data)

    @classmethod
    def read_json(cls, path) -> ExperimentResult:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def csv_row(self) -> dict:
        c = self.config
        row = {"format": self.format, "version": self.version}
        for key in ("measurement", "model", "id_source", "d", "k_rule", "trials", "master_seed"):
            row[key] = c[key]
        row["n"] = self.n
        row["k"] = self.k
        row.update(self.summary)
        row["normalized_mean"] = self.normalized_mean
        row["reference_name"] = self.reference["name"]
        row["reference_value"] = self.reference["value"]
        return row


def results_csv(results) -> str:
    rows = [r.csv_row() for r in results]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


# -- trials ------------------------------------------------------------------------------

def _parse_endpoint(text: str | None, d: int) -> int | None:
    if text is None:
        return None
    return NodeId.from_str(text, d).value


def _targets(trie: IdTrie, rng: np.random.Generator) -> tuple[list[int], list[int]]:
    """Member and non-member targets for sup-over-y measurements."""
    d = trie.d
    members = list(trie.keys)
    if d <= FULL_TARGET_D:
        member_set = set(members)
        others = [v for v in range(1 << d) if v not in member_set]
    else:
        budget = min(EXTRA_TARGETS, (1 << d) - trie.n)
        others = random_values(budget, d, rng, exclude=set(members))
    return members, others


def _sup_over(network, x: int, targets) -> int:
    best = 0
    for y in targets:
        best = max(best, len(_route_values(network, x, y)) - 1)
    return best


def _one_trial(config: ExperimentConfig, k: int, fixed: tuple | None, trial: int):
    rng = np.random.default_rng(trial_seed(config.master_seed, trial))
    m = config.measurement
    d = config.d
    if m == "t_n":
        return sample_t_n(config.n, k, rng), None

    if fixed is not None:
        order, trie = fixed
    else:
        order = generate_values(config.id_source, config.n, d, rng,
                                prefix=config.prefix, fraction=config.fraction,
                                path=config.ids_file)
        trie = IdTrie.from_values(order, d)

    source = _parse_endpoint(config.source, d)
    if source is not None and source not in trie:
        raise MissingNodeError(f"source {NodeId(source, d)} is not one of the ids")
    target = _parse_endpoint(config.target, d)

    if m == "t_polar":
        x = NodeId(order[0] if source is None else source, d)
        trace = simulate_routing_process(trie, x, polar_opposite(x), k, rng)
        return trace.length, None
    if m in ("t_fixed_pair", "s_sizes"):
        x = NodeId(trie.keys[0] if source is None else source, d)
        y = NodeId((1 << d) - 1 if target is None else target, d)
        trace = simulate_routing_process(trie, x, y, k, rng)
        extra = {"s_sizes": list(trace.subtree_sizes)} if m == "s_sizes" else None
        return trace.length, extra

    network = build_network(trie, k, rng)
    members, others = _targets(trie, rng)
    if m == "t_sup_y":
        x = order[0] if source is None else source
        sup_m = _sup_over(network, x, members)
        sup_o = _sup_over(network, x, others) if others else 0
        return max(sup_m, sup_o), {"sup_members": sup_m, "sup_nonmembers": sup_o}
    # t_sup_xy
    targets = members + others
    if trie.n * len(targets) <= config.pairs:
        return max(_sup_over(network, x, targets) for x in members), None
    xs = rng.integers(0, trie.n, size=config.pairs)
    ys = rng.integers(0, len(targets), size=config.pairs)
    best = 0
    for i, j in zip(xs.tolist(), ys.tolist()):
        best = max(best, len(_route_values(network, members[i], targets[j])) - 1)
    return best, None


def _run_chunk(config: ExperimentConfig, k: int, fixed, trials) -> list:
    return [_one_trial(config, k, fixed, t) for t in trials]


def _chunks(total: int, parts: int) -> list[range]:
    parts = max(1, min(parts, total))
    bounds = np.linspace(0, total, parts + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds, bounds[1:]) if b > a]


def resolve_n(config: ExperimentConfig) -> int:
    if config.id_source == "file":
        with open(config.ids_file) as fh:
            count = sum(1 for line in fh if line.split("#", 1)[0].strip())
        if config.n is not None and config.n != count:
            raise ConfigError(f"{config.ids_file} holds {count} ids but n={config.n}")
        return count
    return config.n


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Run ``config.trials`` trials, optionally spread over ``workers`` processes."""
    config.validate()
    n = resolve_n(config)
    if config.n is None:
        config = config.with_(n=n)
        config.validate()
    k = config.resolve_k(n)

    fixed = None
    if config.model == "deterministic-ids" and config.measurement != "t_n":
        rng = np.random.default_rng(ids_seed(config.master_seed))
        order = generate_values(config.id_source, n, config.d, rng,
                                prefix=config.prefix, fraction=config.fraction,
                                path=config.ids_file)
        fixed = (order, IdTrie.from_values(order, config.d))

    chunks = _chunks(config.trials, workers if workers > 1 else 1)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [config] * len(chunks), [k] * len(chunks),
                                  [fixed] * len(chunks), chunks))
    else:
        parts = [_run_chunk(config, k, fixed, c) for c in chunks]

    outcomes = [o for part in parts for o in part]
    values = [int(v) for v, _ in outcomes]
    extras: dict = {}
    for _, extra in outcomes:
        for key, val in (extra or {}).items():
            extras.setdefault(key, []).append(val)

    summary = summarize(values)
    return ExperimentResult(
        config=config.as_dict(),
        k=k,
        n=n,
        values=values,
        summary=summary,
        normalized_mean=summary["mean"] / math.log(n) if n > 1 else None,
        reference=reference_for(config, k),
        extras=extras,
        seed=config.master_seed,
    )
