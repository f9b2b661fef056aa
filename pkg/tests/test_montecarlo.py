import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kadlab.constants import g_of_k
from kadlab.errors import CapacityError, ConfigError, IdParseError, MissingNodeError
from kadlab.idspace import NodeId
from kadlab.montecarlo.config import (
    ExperimentConfig,
    config_from_mapping,
    dump_config,
    load_config,
    parse_config_text,
)
from kadlab.montecarlo.dominance import (
    dkw_epsilon,
    dominance_test,
    product_tail_samples,
    tail_comparison,
    upper_tail,
)
from kadlab.montecarlo.experiment import (
    ExperimentResult,
    results_csv,
    run_experiment,
    summarize,
)
from kadlab.montecarlo.ids import generate_ids, generate_values
from kadlab.montecarlo.samplers import sample_t_n_batch


# -- ids ------------------------------------------------------------------------------

def test_sequential_ids(rng):
    assert [x.to_bin() for x in generate_ids("sequential", 4, 3, rng)] == ["000", "001", "010", "011"]


def test_random_full_space(rng):
    values = generate_values("random", 16, 4, rng)
    assert sorted(values) == list(range(16))


def test_random_wide_ids_distinct(rng):
    ids = generate_ids("random", 1000, 128, rng)
    assert len(set(ids)) == 1000
    assert all(x.d == 128 for x in ids)


@given(st.integers(1, 20), st.integers(0, 2**32 - 1), st.data())
def test_random_values_distinct_in_range(d, seed, data):
    n = data.draw(st.integers(1, min(1 << d, 3000)))
    values = generate_values("random", n, d, np.random.default_rng(seed))
    assert len(values) == n == len(set(values))
    assert all(0 <= v < (1 << d) for v in values)


def test_clustered_ids(rng):
    values = generate_values("clustered", 100, 16, rng, prefix="101", fraction=0.3)
    assert len(set(values)) == 100
    inside = sum(1 for v in values if v >> 13 == 0b101)
    assert inside >= 30
    assert all(v >> 13 == 0b101 for v in values[:30])


def test_capacity_error(rng):
    with pytest.raises(CapacityError):
        generate_values("random", 9, 3, rng)


def test_file_ids(tmp_path, rng):
    path = tmp_path / "ids.txt"
    path.write_text("0001\n0100\n")
    assert generate_values("file", None, 4, rng, path=path) == [1, 4]
    path.write_text("0001\n0001\n")
    with pytest.raises(IdParseError):
        generate_values("file", None, 4, rng, path=path)


# -- config ---------------------------------------------------------------------------

def test_config_reports_every_problem():
    cfg = ExperimentConfig(n=1024, d=5, trials=0, k_rule="n_pow", theta=1.5)
    problems = cfg.problems()
    assert any("log2 n" in p for p in problems)
    assert any("trials" in p for p in problems)
    assert any("theta" in p for p in problems)
    with pytest.raises(ConfigError) as err:
        cfg.validate()
    assert len(err.value.problems) == len(problems)


def test_resolve_k():
    assert ExperimentConfig(k=5).resolve_k(100) == 5
    assert ExperimentConfig(k_rule="log_n").resolve_k(1000) == math.ceil(math.log(1000))
    assert ExperimentConfig(k_rule="n_pow", theta=0.5).resolve_k(4096) == 64
    assert ExperimentConfig(k_rule="n_pow", theta=0.5).resolve_k(4097) == 65


def test_config_file_round_trip(tmp_path):
    cfg = ExperimentConfig(model="deterministic-ids", id_source="clustered", n=300, d=20,
                           prefix="01", fraction=0.5, master_seed=9, measurement="t_sup_y")
    path = tmp_path / "run.cfg"
    path.write_text("# saved run\n" + dump_config(cfg))
    assert load_config(path) == cfg
    assert load_config(path, {"n": "400"}).n == 400


def test_config_parse_errors():
    with pytest.raises(ConfigError):
        parse_config_text("n = 3\nnot a pair\n")
    with pytest.raises(ConfigError) as err:
        config_from_mapping({"bogus": "1", "n": "x"})
    assert len(err.value.problems) == 2


# -- experiments ----------------------------------------------------------------------

def test_polar_n2_is_one_hop():
    res = run_experiment(ExperimentConfig(n=2, d=6, k=3, trials=30))
    assert res.values == [1] * 30
    assert res.normalized_mean == pytest.approx(1 / math.log(2))


def test_summary_recomputable():
    res = run_experiment(ExperimentConfig(n=200, d=16, k=2, trials=60, master_seed=4))
    assert res.summary == summarize(res.values)
    assert res.summary["count"] == 60
    assert res.reference["value"] == pytest.approx(1 / g_of_k(2))


def test_result_json_round_trip(tmp_path):
    res = run_experiment(ExperimentConfig(n=64, d=10, trials=5, master_seed=1))
    path = tmp_path / "r.json"
    res.write_json(path)
    back = ExperimentResult.read_json(path)
    assert back == res
    assert "values" not in res.to_dict(include_trials=False)
    assert results_csv([res]).splitlines()[0].startswith("format,version")


def test_infeasible_config_rejected():
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig(n=100, d=6))


def test_deterministic_model_fixed_ids():
    cfg = ExperimentConfig(model="deterministic-ids", id_source="sequential", n=256, d=8, k=2,
                           trials=40, measurement="s_sizes")
    res = run_experiment(cfg)
    first = [s[0] for s in res.extras["s_sizes"]]
    # lookup from 0 toward 1...1: S_0 is the right half
    assert set(first) == {128}


def test_missing_source_rejected():
    cfg = ExperimentConfig(model="deterministic-ids", id_source="sequential", n=8, d=8,
                           trials=1, measurement="t_fixed_pair", source="11111111")
    with pytest.raises(MissingNodeError):
        run_experiment(cfg)


def test_file_source(tmp_path):
    path = tmp_path / "ids.txt"
    path.write_text("000\n011\n101\n110\n")
    cfg = ExperimentConfig(model="deterministic-ids", id_source="file", ids_file=str(path), n=None,
                           d=3, k=1, trials=10, measurement="t_fixed_pair")
    res = run_experiment(cfg)
    assert res.n == 4
    assert set(res.values) <= {1, 2}


def test_sup_measurements():
    cfg = ExperimentConfig(model="deterministic-ids", id_source="sequential", n=32, d=6, k=2,
                           trials=4, measurement="t_sup_y")
    res = run_experiment(cfg)
    assert all(v == max(a, b) for v, a, b in zip(res.values, res.extras["sup_members"],
                                                  res.extras["sup_nonmembers"]))
    assert all(v <= 6 for v in res.values)
    xy = run_experiment(cfg.with_(measurement="t_sup_xy", pairs=100_000))
    assert all(v <= 6 for v in xy.values)
    assert res.reference["name"] == "c_k'" and xy.reference["name"] == "c_k*"


def test_t_n_measurement():
    res = run_experiment(ExperimentConfig(n=2**10, d=10, k=8, trials=50, measurement="t_n"))
    assert all(1 <= v <= 10 for v in res.values)


def test_determinism_and_workers(tmp_path):
    cfg = ExperimentConfig(n=500, d=20, k=3, trials=12, master_seed=42)
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert a.to_json() == b.to_json()
    assert run_experiment(cfg, workers=3).to_json() == a.to_json()
    assert run_experiment(cfg.with_(master_seed=43)).values != a.values


def test_polar_and_walk_gap_shrinks():
    # |T_polar - T_n| / log n, sampled independently, decreases with n
    k, trials = 8, 200
    rng = np.random.default_rng(5)
    gaps = []
    for bits in (12, 17):
        polar = np.array(run_experiment(ExperimentConfig(n=2**bits, d=32, k=k, trials=trials,
                                                          master_seed=bits)).values)
        walks = sample_t_n_batch(2**bits, k, rng, trials)
        gaps.append(np.abs(polar - walks).mean() / (bits * math.log(2)))
    assert gaps[1] < gaps[0]


# -- dominance ------------------------------------------------------------------------

def test_dkw_epsilon():
    assert dkw_epsilon(10**6, 0.01) == pytest.approx(math.sqrt(math.log(200) / 2e6))


def test_upper_tail():
    s = np.array([1, 2, 2, 3])
    assert upper_tail(s, [0, 2, 3, 4]).tolist() == [1.0, 0.75, 0.25, 0.0]


def test_identical_samples_pass(rng):
    a = rng.random(1000)
    rep = dominance_test(a, a)
    assert rep.verdict and rep.max_gap == 0
    assert rep.as_dict()["verdict"] == "pass"


def test_shifted_sample_fails(rng):
    b = rng.random(50_000)
    rep = dominance_test(b + 1, b)
    assert not rep.verdict
    assert rep.max_gap > rep.slack


def test_dominance_rejects_empty():
    with pytest.raises(ValueError):
        dominance_test([], [1.0])


def test_product_tail_samples(rng):
    hits = product_tail_samples(1024, 4, 3, 1000, rng)
    assert hits.shape == (1000, 4)
    assert hits[:, 0].all()
    assert np.all(hits[:, 1:] <= hits[:, :-1])


def test_tail_comparison_rows():
    cfg = ExperimentConfig(model="deterministic-ids", id_source="sequential", n=256, d=8, k=2,
                           trials=2000, measurement="t_fixed_pair")
    rows = tail_comparison(cfg, [0, 1, 2, 3, 4, 5])
    assert rows[0].routing_tail == 1.0 and rows[0].product_tail == 1.0
    assert all(r.empirical_ok and r.analytic_ok for r in rows)
    with pytest.raises(ValueError):
        tail_comparison(cfg.with_(measurement="t_n"), [1])
    with pytest.raises(ValueError):
        tail_comparison(cfg, [1], hop_offset=-1)
