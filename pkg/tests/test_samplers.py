import math

import numpy as np
import pytest
from scipy import stats

from kadlab.constants import beta_product_moment, expected_g1, g1_cdf
from kadlab.montecarlo.samplers import (
    sample_beta_min,
    sample_g1,
    sample_t_n,
    sample_t_n_batch,
    sample_w,
    sample_w_paths,
)


def within_3se(sample, target):
    se = sample.std(ddof=1) / math.sqrt(sample.size)
    return abs(sample.mean() - target) <= 3 * se


@pytest.mark.parametrize("k", [1, 2, 8])
def test_beta_min_mean(rng, k):
    draws = sample_beta_min(k, rng, size=200_000)
    assert within_3se(draws, 1 / (k + 1))
    assert draws.min() >= 0 and draws.max() <= 1


def test_beta_min_k1_is_uniform(rng):
    assert stats.kstest(sample_beta_min(1, rng, size=50_000), "uniform").pvalue > 0.01


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_beta_min_moments(rng, r):
    draws = sample_beta_min(3, rng, size=200_000) ** r
    assert within_3se(draws, beta_product_moment(3, r, 1))


def test_beta_min_scalar_and_bad_k(rng):
    assert isinstance(sample_beta_min(4, rng), float)
    with pytest.raises(ValueError):
        sample_beta_min(0, rng)


def test_w_basics(rng):
    assert sample_w(17.0, 3, 0, rng) == 17.0
    assert np.all(sample_w(5.0, 3, 0, rng, size=4) == 5.0)
    w = sample_w(1000.0, 4, 2, rng, size=200_000)
    assert within_3se(w, 1000.0 / 25)
    with pytest.raises(ValueError):
        sample_w(1.0, 2, -1, rng)


def test_w_paths_monotone(rng):
    paths = sample_w_paths(500.0, 2, 6, rng, 1000)
    assert paths.shape == (1000, 7)
    assert np.all(paths[:, 0] == 500.0)
    assert np.all(np.diff(paths, axis=1) <= 0)


def test_g1_k1_is_geometric(rng):
    draws = sample_g1(1, rng, size=200_000)
    assert draws.min() >= 1
    assert within_3se(draws.astype(float), 2.0)
    for i in range(1, 6):
        assert abs((draws == i).mean() - 2.0**-i) < 0.005


@pytest.mark.parametrize("k", [1, 3, 8])
def test_g1_cdf_agreement(rng, k):
    draws = sample_g1(k, rng, size=100_000)
    for i in range(1, 12):
        assert abs((draws <= i).mean() - g1_cdf(k, i)) < 0.01
    assert within_3se(draws.astype(float), expected_g1(k))


def test_g1_scalar(rng):
    g = sample_g1(5, rng)
    assert isinstance(g, int) and g >= 1


def test_g1_extreme_uniform_draw_is_finite():
    class Zero:
        def random(self, size=None):
            return 0.0 if size is None else np.zeros(size)

    assert sample_g1(3, Zero()) == 1


def test_t_n_small_cases(rng):
    assert all(sample_t_n(2, 4, rng) == 1 for _ in range(50))
    with pytest.raises(ValueError):
        sample_t_n(1, 4, rng)


def test_t_n_at_most_log2_n(rng):
    for n in (3, 100, 2**20):
        walks = sample_t_n_batch(n, 1, rng, 5000)
        assert walks.max() <= math.ceil(math.log2(n))
        assert walks.min() >= 1


def test_t_n_matches_direct_summation():
    # same stream, G's summed by hand
    n, k = 5000, 3
    a = np.random.default_rng(7)
    b = np.random.default_rng(7)
    for _ in range(200):
        t = sample_t_n(n, k, a)
        total, steps = 0, 0
        while total < math.log2(n):
            total += sample_g1(k, b)
            steps += 1
        assert t == steps


def test_t_n_batch_matches_scalar_law(rng):
    batch = sample_t_n_batch(2**12, 2, rng, 50_000)
    scalar = np.array([sample_t_n(2**12, 2, rng) for _ in range(10_000)])
    assert abs(batch.mean() - scalar.mean()) < 4 * scalar.std() / math.sqrt(scalar.size)
