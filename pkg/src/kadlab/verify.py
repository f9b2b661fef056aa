"""Invariant suites behind ``kadlab verify``.

Each suite returns a list of :class:`Check`. ``budget`` scales the number of
random instances or Monte-Carlo trials a suite uses; the defaults are sized to
run in seconds to a few minutes on one core.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from decimal import Decimal

import numpy as np

from . import __version__
from .constants import (
    beta_product_moment,
    constant,
    constants_table,
    expected_g1,
    g_of_k,
    harmonic,
    rate_h,
)
from .idspace import (
    NodeId,
    Ordering,
    bucket_index,
    common_prefix_len,
    compare_by_distance,
    distance_class,
    polar_opposite,
    xor_distance,
)
from .montecarlo.config import ExperimentConfig
from .montecarlo.dominance import subtree_dominance, tail_comparison
from .montecarlo.experiment import aux_seed, run_experiment
from .montecarlo.ids import random_values
from .montecarlo.oracle import brute_force_t_distribution, catalog_entries, histogram, total_variation
from .montecarlo.samplers import sample_t_n_batch
from .network import build_network, is_strongly_connected, route, sample_routing_times
from .trie import IdTrie

SUITES = ("metric", "trie", "dominance", "tails", "constants", "convergence", "oracle")

DEFAULT_BUDGET = {
    "metric": 2000,
    "trie": 200,
    "dominance": 100_000,
    "tails": 100_000,
    "constants": 1,
    "convergence": 300,
    "oracle": 100_000,
}

# published constants for k = 1..10 as printed: c_k, c_k', c_k*
REFERENCE_CONSTANTS = {
    1: ("1", "2.718281828", "3.591121477"),
    2: ("0.6666666667", "1.673805050", "2.170961287"),
    3: ("0.5454545455", "1.302556173", "1.668389781"),
    4: ("0.4800000000", "1.105969343", "1.403318015"),
    5: ("0.4379562044", "0.9817977138", "1.236481558"),
    6: ("0.4081632653", "0.8950813294", "1.120340102"),
    7: ("0.3856749311", "0.8304602569", "1.034040176"),
    8: ("0.3679369251", "0.7800681679", "0.9669189101"),
    9: ("0.3534857624", "0.7394331755", "0.9129238915"),
    10: ("0.3414171521", "0.7058123636", "0.8683482160"),
}


def matches_printed(value: float, printed: str) -> bool:
    """True when ``value`` agrees with ``printed`` to within one unit of its last digit."""
    ref = Decimal(printed)
    unit = Decimal(1).scaleb(ref.as_tuple().exponent)
    return abs(Decimal(repr(value)) - ref) <= unit


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class SuiteReport:
    suite: str
    budget: int
    seed: int
    checks: list
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "budget": self.budget,
            "seed": self.seed,
            "version": self.version,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
        }


# -- metric -----------------------------------------------------------------------

def suite_metric(budget: int, seed: int) -> list[Check]:
    rng = np.random.default_rng(aux_seed(seed, 10))
    bad = {"symmetry": 0, "identity": 0, "triangle": 0, "bucket": 0, "prefix": 0,
           "ordering": 0, "polar": 0}
    for _ in range(budget):
        d = int(rng.integers(1, 70))
        x, y, z = (NodeId(int.from_bytes(rng.bytes(9), "big") % (1 << d), d) for _ in range(3))
        dxy = xor_distance(x, y)
        bad["symmetry"] += dxy != xor_distance(y, x)
        bad["identity"] += (dxy == 0) != (x == y)
        # XOR satisfies the (stronger than triangle) bound d(x,z) <= d(x,y) + d(y,z)
        bad["triangle"] += xor_distance(x, z) > dxy + xor_distance(y, z)
        if x != y:
            i = bucket_index(x, y)
            bad["bucket"] += not (1 << (i - 1) <= dxy < 1 << i)
            bad["prefix"] += common_prefix_len(x, y) != d - i
        expect = Ordering((xor_distance(x, y) > xor_distance(x, z)) - (xor_distance(x, y) < xor_distance(x, z)))
        bad["ordering"] += compare_by_distance(y, z, x) != expect
        bad["polar"] += xor_distance(x, polar_opposite(x)) != (1 << d) - 1
    checks = [Check(f"metric.{name}", count == 0, {"violations": count, "samples": budget})
              for name, count in bad.items()]
    # distance classes partition the other ids
    d = 8
    ids = [NodeId(v, d) for v in random_values(40, d, rng)]
    x = ids[0]
    classes = [distance_class(x, i, ids) for i in range(1, d + 1)]
    covered = sorted(u.value for c in classes for u in c)
    checks.append(Check("metric.classes_partition",
                        covered == sorted(u.value for u in ids if u != x)))
    return checks


# -- trie -------------------------------------------------------------------------

def suite_trie(budget: int, seed: int) -> list[Check]:
    rng = np.random.default_rng(aux_seed(seed, 11))
    count_bad = closest_bad = subtree_bad = 0
    for _ in range(budget):
        d = int(rng.integers(1, 13))
        n = int(rng.integers(1, min(64, 1 << d) + 1))
        values = random_values(n, d, rng)
        trie = IdTrie.from_values(values, d)
        depth = int(rng.integers(0, d + 1))
        prefix = int(rng.integers(0, 1 << depth))
        count_bad += trie.count(depth, prefix) != trie.recount(depth, prefix)
        y = int(rng.integers(0, 1 << d))
        closest = min(values, key=y.__xor__)
        closest_bad += trie.keys[trie.closest_index(y)] != closest
        # next-hop subtree: exactly the leaves strictly closer to y than z, taken
        # as the highest subtree on closest's side of their common ancestor
        z = values[int(rng.integers(0, n))]
        ref = trie.right_subtree_toward(z, closest)
        got = set() if ref is None else set(trie.keys[ref.lo:ref.hi])
        if z == closest:
            want = set()
        else:
            depth_s = d - (z ^ closest).bit_length() + 1
            want = {v for v in values if v >> (d - depth_s) == closest >> (d - depth_s)}
            # every member is closer to y than z
            subtree_bad += any((v ^ y) >= (z ^ y) for v in got)
        subtree_bad += got != want
    return [
        Check("trie.count_matches_scan", count_bad == 0, {"violations": count_bad, "instances": budget}),
        Check("trie.closest_matches_scan", closest_bad == 0, {"violations": closest_bad}),
        Check("trie.next_hop_subtree", subtree_bad == 0, {"violations": subtree_bad}),
    ]


# -- dominance --------------------------------------------------------------------

def suite_dominance(budget: int, seed: int) -> list[Check]:
    run = subtree_dominance(n=10_000, d=20, k=8, t_max=5, trials=budget, seed=seed)
    return [Check(f"dominance.S_{t}_below_W_{t}", rep.verdict, rep.as_dict())
            for t, rep in enumerate(run.reports, start=1)]


# -- tails ------------------------------------------------------------------------

def suite_tails(budget: int, seed: int) -> list[Check]:
    config = ExperimentConfig(model="deterministic-ids", id_source="sequential", n=1024, d=10,
                              k=4, trials=budget, master_seed=seed, measurement="t_fixed_pair")
    rows = tail_comparison(config, range(0, 9), hop_offset=1)
    checks = []
    for row in rows:
        checks.append(Check(f"tails.T_ge_{row.t + 1}_below_product_{row.t}", row.empirical_ok,
                            row.as_dict()))
        checks.append(Check(f"tails.moment_bound_{row.t}", row.analytic_ok, row.as_dict()))
    return checks


# -- constants --------------------------------------------------------------------

def suite_constants(budget: int, seed: int) -> list[Check]:
    checks = []
    for row in constants_table(range(1, 11)):
        printed = REFERENCE_CONSTANTS[row.k]
        values = (row.c_k, row.c_k_prime, row.c_k_star)
        ok = all(matches_printed(v, p) for v, p in zip(values, printed))
        checks.append(Check(f"constants.reference_row_{row.k}", ok,
                            {"computed": list(values), "printed": list(printed)}))
    worst = max(abs(constant(k, 0) * harmonic(k) - 1) for k in range(1, 101))
    checks.append(Check("constants.c_k_times_H_k", worst <= 1e-12, {"max_error": worst}))
    ordered = all(constant(k, 0) <= constant(k, 1) <= constant(k, 2) for k in range(1, 101))
    checks.append(Check("constants.ordering", ordered))
    e_err = abs(rate_h(1, 1, math.e - 1) - math.e)
    checks.append(Check("constants.c1_prime_is_e", e_err <= 1e-9, {"error": e_err}))
    g_ok = all(harmonic(k) <= g_of_k(k) <= harmonic(k) + math.log(2) for k in range(1, 51))
    checks.append(Check("constants.g_between_H_and_H_plus_log2", g_ok))
    checks.append(Check("constants.expected_g1_k1", abs(expected_g1(1) - 2) < 1e-12))
    mom = abs(beta_product_moment(3, 1.0, 2) - 1 / 16)
    checks.append(Check("constants.beta_moment_r1", mom < 1e-14, {"error": mom}))
    return checks


# -- convergence ------------------------------------------------------------------

def suite_convergence(budget: int, seed: int) -> list[Check]:
    """Trends only: the limits are approached at rate O(1/log n)."""
    k = 8
    target = 1.0 / g_of_k(k)
    rng = np.random.default_rng(aux_seed(seed, 12))
    tn_gaps = []
    for bits in (10, 20, 40):
        walks = sample_t_n_batch(2**bits, k, rng, max(budget * 100, 1000))
        tn_gaps.append(abs(walks.mean() / (bits * math.log(2)) - target))
    polar_gaps = []
    for bits in (8, 14):
        cfg = ExperimentConfig(n=2**bits, d=32, k=k, trials=budget, master_seed=seed,
                               measurement="t_polar")
        res = run_experiment(cfg)
        polar_gaps.append(abs(res.normalized_mean - target))
    return [
        Check("convergence.t_n_gap_shrinks", tn_gaps[0] > tn_gaps[1] > tn_gaps[2],
              {"gaps": tn_gaps, "log2_n": [10, 20, 40], "reference": target}),
        Check("convergence.polar_gap_shrinks", polar_gaps[0] > polar_gaps[1],
              {"gaps": polar_gaps, "log2_n": [8, 14], "reference": target}),
    ]


# -- oracle -----------------------------------------------------------------------

def suite_oracle(budget: int, seed: int) -> list[Check]:
    rng = np.random.default_rng(aux_seed(seed, 13))
    checks = []
    for idx, (ids, k, x, y) in enumerate(catalog_entries()):
        exact = brute_force_t_distribution(ids, k, x, y)
        trie = IdTrie.from_values((u.value for u in ids), x.d)
        hops = sample_routing_times(trie, x, y, k, budget, rng)
        tv = total_variation(exact, histogram(hops))
        checks.append(Check(f"oracle.catalog_{idx}", tv < 0.01,
                            {"tv": tv, "trials": budget, "n": len(ids), "d": x.d, "k": k}))
    # built networks: structure holds on random small instances
    bad = 0
    instances = max(20, budget // 1000)
    for _ in range(instances):
        d = int(rng.integers(3, 10))
        n = int(rng.integers(2, min(64, 1 << d) + 1))
        k = int(rng.integers(1, 5))
        trie = IdTrie.from_values(random_values(n, d, rng), d)
        net = build_network(trie, k, rng)
        bad += not is_strongly_connected(net)
        x = trie.leaf(int(rng.integers(0, n)))
        y = NodeId(int(rng.integers(0, 1 << d)), d)
        trace = route(net, x, y)
        dists = [z.value ^ y.value for z in trace.hops]
        closest = min(trie.keys, key=y.value.__xor__)
        bad += not (all(a > b for a, b in zip(dists, dists[1:]))
                    and trace.hops[-1].value == closest and trace.length <= d)
    checks.append(Check("oracle.route_structure", bad == 0, {"violations": bad, "instances": instances}))
    return checks


_SUITES = {
    "metric": suite_metric,
    "trie": suite_trie,
    "dominance": suite_dominance,
    "tails": suite_tails,
    "constants": suite_constants,
    "convergence": suite_convergence,
    "oracle": suite_oracle,
}


def run_suite(suite: str, budget: int | None = None, seed: int = 0) -> SuiteReport:
    if suite not in _SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")
    if budget is None:
        budget = DEFAULT_BUDGET[suite]
    if budget < 1:
        raise ValueError(f"budget must be positive, got {budget}")
    return SuiteReport(suite, budget, seed, _SUITES[suite](budget, seed))
