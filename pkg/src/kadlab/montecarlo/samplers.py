"""Samplers for the dominating product process and the infinite-trie walk."""

from __future__ import annotations

import math

import numpy as np


def sample_beta_min(k: int, rng: np.random.Generator, size=None):
    """Minimum of k independent uniforms on [0, 1] (the Beta(1, k) law)."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if size is None:
        return float(rng.random(k).min())
    shape = (size,) if np.isscalar(size) else tuple(size)
    return rng.random(shape + (k,)).min(axis=-1)


def sample_w(s0: float, k: int, t: int, rng: np.random.Generator, size=None):
    """W_t = s0 * B_1 * ... * B_t."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if size is None:
        w = float(s0)
        for _ in range(t):
            w *= sample_beta_min(k, rng)
        return w
    if t == 0:
        return np.full(size, float(s0))
    return s0 * sample_beta_min(k, rng, size=(size, t)).prod(axis=1)


def sample_w_paths(s0: float, k: int, t: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Whole paths (W_0, ..., W_t) as a (size, t + 1) array."""
    out = np.empty((size, t + 1))
    out[:, 0] = s0
    if t:
        out[:, 1:] = s0 * np.cumprod(sample_beta_min(k, rng, size=(size, t)), axis=1)
    return out


def sample_g1(k: int, rng: np.random.Generator, size=None):
    """Per-hop depth advance G with P{G <= i} = (1 - 2^-i)^k, by inverting the CDF."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    u = rng.random(size)
    # smallest i with (1 - 2^-i)^k >= u, i.e. i >= -log2(1 - u^(1/k))
    with np.errstate(divide="ignore"):
        gap = -np.expm1(np.log(u) / k)
    g = np.maximum(np.ceil(-np.log2(gap)), 1)
    if size is None:
        return int(g)
    return g.astype(np.int64)


def sample_t_n(n: int, k: int, rng: np.random.Generator) -> int:
    """First t >= 1 with G_1 + ... + G_t >= log2 n."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    level = math.log2(n)
    total, t = 0, 0
    while True:
        total += sample_g1(k, rng)
        t += 1
        if total >= level:
            return t


def sample_t_n_batch(n: int, k: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorised sample_t_n. Draws ceil(log2 n) advances per walk, enough since each is >= 1."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    level = math.log2(n)
    steps = max(1, math.ceil(level))
    walk = np.cumsum(sample_g1(k, rng, size=(size, steps)), axis=1)
    return np.argmax(walk >= level, axis=1) + 1
