"""Acceptance criteria, one test per criterion, each at its stated tolerance.

The terminal summary prints one PASS/FAIL line per criterion (see conftest.py).
These runs are the slow part of the suite, a few minutes in total on one core.
"""

import csv
import filecmp
import math
import time

import numpy as np
import pytest

from kadlab.cli import main
from kadlab.constants import (
    beta_product_moment,
    constant,
    g1_cdf,
    g_of_k,
    harmonic,
    rate_h,
)
from kadlab.idspace import NodeId
from kadlab.montecarlo.config import ExperimentConfig
from kadlab.montecarlo.dominance import dkw_epsilon, subtree_dominance, tail_comparison
from kadlab.montecarlo.experiment import run_experiment
from kadlab.montecarlo.ids import random_values
from kadlab.montecarlo.oracle import brute_force_t_distribution, catalog_entries, histogram, total_variation
from kadlab.montecarlo.samplers import sample_beta_min, sample_g1, sample_t_n_batch
from kadlab.network import (
    build_network,
    is_strongly_connected,
    route,
    sample_routing_times,
    simulate_routing_process,
)
from kadlab.trie import IdTrie
from kadlab.verify import REFERENCE_CONSTANTS, matches_printed


def report(number, ok, message):
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {message}")


def test_criterion_01_constants_table(capsys):
    constant.cache_clear()
    harmonic.cache_clear()
    start = time.perf_counter()
    code = main(["constants", "--format", "csv"])
    elapsed = time.perf_counter() - start
    out = capsys.readouterr().out
    rows = list(csv.DictReader(line for line in out.splitlines() if not line.startswith("#")))
    mismatches = []
    for row in rows:
        printed = REFERENCE_CONSTANTS[int(row["k"])]
        for col, ref in zip(("c_k", "c_k_prime", "c_k_star"), printed):
            if not matches_printed(float(row[col]), ref):
                mismatches.append((row["k"], col, row[col], ref))
    ok = code == 0 and len(rows) == 10 and not mismatches and elapsed < 5
    report(1, ok, f"30 values, mismatches={mismatches}, runtime={elapsed:.2f}s")
    assert code == 0 and len(rows) == 10
    assert not mismatches
    assert elapsed < 5


def test_criterion_02_closed_form_identities():
    worst = max(abs(constant(k, 0) * harmonic(k) - 1) for k in range(1, 101))
    ordered = [k for k in range(1, 101) if not constant(k, 0) <= constant(k, 1) <= constant(k, 2)]
    e_err = abs(rate_h(1, 1, math.e - 1) - math.e)
    report(2, worst <= 1e-12 and not ordered and e_err <= 1e-9,
           f"max|c_k H_k - 1|={worst:.1e}, order violations={ordered}, |h_1(e-1) - e|={e_err:.1e}")
    assert worst <= 1e-12
    assert not ordered
    assert e_err <= 1e-9


def test_criterion_03_moment_formula():
    rng = np.random.default_rng(2003)
    paths = 10**6
    start = time.perf_counter()
    misses = []
    for k in (1, 2, 8):
        for t in (1, 5):
            prod = np.ones(paths)
            for _ in range(t):
                prod *= sample_beta_min(k, rng, size=paths)
            for r in (0.5, 1.0, 2.0):
                x = prod**r
                se = x.std(ddof=1) / math.sqrt(paths)
                z = (x.mean() - beta_product_moment(k, r, t)) / se
                if abs(z) > 3:
                    misses.append((k, r, t, round(z, 2)))
    elapsed = time.perf_counter() - start
    report(3, not misses and elapsed < 60, f"18 cases, outside 3 SE={misses}, runtime={elapsed:.1f}s")
    assert not misses
    assert elapsed < 60


def test_criterion_04_g1_law():
    rng = np.random.default_rng(2004)
    draws = 10**6
    eps = dkw_epsilon(draws, 0.01)
    gaps = {}
    for k in (1, 8):
        g = np.sort(sample_g1(k, rng, size=draws))
        support = np.arange(1, g.max() + 1)
        ecdf = np.searchsorted(g, support, side="right") / draws
        gaps[k] = float(np.max(np.abs(ecdf - np.array([g1_cdf(k, int(i)) for i in support]))))
    g = sample_g1(1, rng, size=draws).astype(float)
    z = (g.mean() - 2.0) / (g.std(ddof=1) / math.sqrt(draws))
    ok = all(v <= eps for v in gaps.values()) and abs(z) <= 3
    report(4, ok, f"sup CDF gap={gaps} vs DKW eps={eps:.5f}; k=1 mean z={z:.2f}")
    assert all(v <= eps for v in gaps.values())
    assert abs(z) <= 3


def test_criterion_05_subtree_dominance():
    start = time.perf_counter()
    run = subtree_dominance(n=10_000, d=20, k=8, t_max=5, trials=100_000, seed=2005, confidence=0.99)
    elapsed = time.perf_counter() - start
    verdicts = [r.verdict for r in run.reports]
    gaps = [round(r.max_gap, 5) for r in run.reports]
    report(5, all(verdicts) and elapsed < 600,
           f"|S_0|={run.s0}, t=1..5 verdicts={verdicts}, max gaps={gaps}, "
           f"slack={run.reports[0].slack:.5f}, runtime={elapsed:.1f}s")
    assert all(verdicts)
    assert elapsed < 600


SEQUENTIAL_1024 = ExperimentConfig(model="deterministic-ids", id_source="sequential", n=1024, d=10,
                                   k=4, trials=100_000, master_seed=2006, measurement="t_fixed_pair")


def test_criterion_06_hop_tail_bound():
    # P{T >= t} against P{n B_1...B_t >= 1}, paired exactly as stated
    rows = tail_comparison(SEQUENTIAL_1024, range(0, 12), hop_offset=0)
    empirical_bad = [(r.t, round(r.routing_tail, 4), round(r.product_tail, 4))
                     for r in rows if not r.empirical_ok]
    analytic_bad = [r.t for r in rows if not r.analytic_ok]
    report(6, not empirical_bad and not analytic_bad,
           f"empirical violations (t, P(T>=t), P(nB>=1))={empirical_bad}, "
           f"analytic violations={analytic_bad}")
    assert not analytic_bad
    assert not empirical_bad


def test_hop_tail_bound_with_one_hop_shift():
    # the pairing that holds: the (t+1)-th hop happens iff S_t is nonempty
    rows = tail_comparison(SEQUENTIAL_1024, range(0, 12), hop_offset=1)
    assert all(r.empirical_ok for r in rows)
    assert all(r.analytic_ok for r in rows)


def test_criterion_07_polar_concentration():
    target = 1.0 / g_of_k(8)
    norm = {}
    for bits in (10, 14, 17):
        cfg = ExperimentConfig(n=2**bits, d=32, k=8, trials=2000, master_seed=2007,
                               measurement="t_polar")
        norm[bits] = run_experiment(cfg).normalized_mean
    ratio = norm[17] / target
    closer = abs(norm[17] - target) < abs(norm[10] - target)
    report(7, 0.75 <= ratio <= 1.4 and closer,
           f"mean/log n={ {b: round(v, 4) for b, v in norm.items()} }, 1/g(8)={target:.4f}, "
           f"ratio at 2^17={ratio:.3f}")
    assert 0.75 <= ratio <= 1.4
    assert closer


def test_criterion_08_first_passage():
    start = time.perf_counter()
    n = 2**20
    walks = sample_t_n_batch(n, 8, np.random.default_rng(2008), 10**5)
    elapsed = time.perf_counter() - start
    ratio = walks.mean() / math.log(n) * g_of_k(8)
    report(8, abs(ratio - 1) <= 0.10 and elapsed < 60,
           f"E[T_n]/log n / (1/g(8)) = {ratio:.4f} (tolerance 10%), runtime={elapsed:.1f}s")
    assert elapsed < 60
    assert abs(ratio - 1) <= 0.10


def test_criterion_09_routing_correctness():
    rng = np.random.default_rng(2009)
    instances, bad = 1000, []
    for idx in range(instances):
        n = int(rng.integers(2, 513))
        d = int(rng.integers(max(1, math.ceil(math.log2(n))), 25))
        k = int(rng.integers(1, 9))
        values = random_values(n, d, rng)
        trie = IdTrie.from_values(values, d)
        net = build_network(trie, k, rng)
        if not is_strongly_connected(net):
            bad.append((idx, "not strongly connected"))
        for _ in range(10):
            x = NodeId(values[int(rng.integers(0, n))], d)
            y = NodeId(values[int(rng.integers(0, n))] if rng.random() < 0.3
                       else int(rng.integers(0, 1 << d)), d)
            trace = route(net, x, y)
            dists = [z.value ^ y.value for z in trace.hops]
            closest = min(values, key=lambda v: v ^ y.value)
            if not all(a > b for a, b in zip(dists, dists[1:])):
                bad.append((idx, "distance not strictly decreasing"))
            if trace.hops[-1].value != closest:
                bad.append((idx, "did not end at the closest node"))
            if trace.length > d:
                bad.append((idx, "longer than d"))
    report(9, not bad, f"{instances} instances x 10 lookups, violations={bad[:5]}")
    assert not bad


def test_criterion_10_oracle_equivalence():
    rng = np.random.default_rng(2010)
    mc_tv, engine_tv = [], []
    route_trials = 50_000
    for ids, k, x, y in catalog_entries():
        exact = brute_force_t_distribution(ids, k, x, y)
        trie = IdTrie.from_values((u.value for u in ids), x.d)
        batch = sample_routing_times(trie, x, y, k, 10**6, rng)
        mc_tv.append(total_variation(exact, histogram(batch)))
        routed = [route(build_network(trie, k, rng), x, y).length for _ in range(route_trials)]
        simulated = [simulate_routing_process(trie, x, y, k, rng).length for _ in range(route_trials)]
        engine_tv.append(total_variation(histogram(routed), histogram(simulated)))
    ok = max(mc_tv) < 0.01 and max(engine_tv) < 0.02
    report(10, ok, f"20 catalog sets, max TV(exact, MC)={max(mc_tv):.4f}, "
                   f"max TV(route, simulate)={max(engine_tv):.4f}")
    assert max(mc_tv) < 0.01
    assert max(engine_tv) < 0.02


def test_criterion_11_sup_regime():
    # threshold 4: pilot runs gave a mean of 3, above 2.5, but recalibrating could only
    # loosen the threshold, so it stays at 4
    cfg = ExperimentConfig(n=4096, d=32, k_rule="n_pow", theta=0.5, trials=200, master_seed=2011,
                           measurement="t_sup_xy", pairs=4096)
    res = run_experiment(cfg)
    share = np.mean(np.array(res.values) <= 4)
    report(11, res.k == 64 and share >= 0.99,
           f"k={res.k}, share of trials with sup T <= 4: {share:.3f}, "
           f"values seen={sorted(set(res.values))}")
    assert res.k == 64
    assert share >= 0.99


def test_criterion_12_large_k_trend():
    scaled = {off: {k: constant(k, off) * math.log(k) for k in (10**2, 10**4)} for off in (0, 1, 2)}
    in_band = {off: 0.8 <= v[10**4] <= 1.25 for off, v in scaled.items()}
    closer = {off: abs(v[10**4] - 1) < abs(v[10**2] - 1) for off, v in scaled.items()}
    shown = {off: {k: round(x, 4) for k, x in v.items()} for off, v in scaled.items()}
    report(12, all(in_band.values()) and all(closer.values()),
           f"constant*log k={shown}, in [0.8, 1.25] at 10^4: {in_band}, trend: {closer}")
    assert all(closer.values())
    assert all(in_band.values())


def test_criterion_13_reproducibility(tmp_path):
    configs = [
        ExperimentConfig(n=4096, d=32, k=8, trials=64, master_seed=2013, measurement="t_polar"),
        ExperimentConfig(model="deterministic-ids", id_source="clustered", prefix="0110",
                         fraction=0.5, n=512, d=16, k=3, trials=16, master_seed=2013,
                         measurement="t_sup_y"),
        ExperimentConfig(n=2**16, d=16, k=8, trials=200, master_seed=2013, measurement="t_n"),
    ]
    same = []
    for i, cfg in enumerate(configs):
        paths = [tmp_path / f"{i}_{tag}.json" for tag in ("a", "b", "w4")]
        run_experiment(cfg).write_json(paths[0])
        run_experiment(cfg).write_json(paths[1])
        run_experiment(cfg, workers=4).write_json(paths[2])
        same.append(filecmp.cmp(paths[0], paths[1], shallow=False)
                    and filecmp.cmp(paths[0], paths[2], shallow=False))
    report(13, all(same), f"identical files (repeat and 4 workers) per config: {same}")
    assert all(same)
