"""Empirical stochastic-dominance checks with DKW confidence bands.

``A`` is stochastically smaller than ``B`` when P{A >= r} <= P{B >= r} for all r.
With samples of each, the check scans every pooled sample value r and allows
the gap tail_A(r) - tail_B(r) to reach the sum of the two samples' DKW radii.
By the DKW inequality each empirical CDF lies within its radius of the truth
simultaneously for all r, so a true dominance passes with probability at least
``confidence``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..constants import optimized_tail_bound
from ..idspace import NodeId
from ..network import sample_routing_times
from ..trie import IdTrie
from .config import ExperimentConfig
from .experiment import aux_seed, run_experiment
from .ids import generate_values
from .samplers import sample_beta_min, sample_w_paths


def dkw_epsilon(count: int, alpha: float) -> float:
    """Radius of the two-sided DKW band holding with probability 1 - alpha."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * count))


def upper_tail(sorted_sample: np.ndarray, r) -> np.ndarray:
    """Empirical P{X >= r} for each r."""
    n = sorted_sample.size
    return (n - np.searchsorted(sorted_sample, r, side="left")) / n


@dataclass
class DominanceReport:
    thresholds: np.ndarray
    gaps: np.ndarray
    eps_a: float
    eps_b: float
    confidence: float
    verdict: bool

    @property
    def slack(self) -> float:
        return self.eps_a + self.eps_b

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max()) if self.gaps.size else 0.0

    @property
    def worst_threshold(self) -> float:
        return float(self.thresholds[int(np.argmax(self.gaps))]) if self.gaps.size else math.nan

    def as_dict(self) -> dict:
        return {
            "verdict": "pass" if self.verdict else "fail",
            "confidence": self.confidence,
            "thresholds_scanned": int(self.thresholds.size),
            "max_gap": self.max_gap,
            "worst_threshold": self.worst_threshold,
            "slack": self.slack,
            "eps_a": self.eps_a,
            "eps_b": self.eps_b,
        }


def dominance_test(empirical_a, empirical_b, confidence: float = 0.99) -> DominanceReport:
    """Test that sample A is stochastically no larger than sample B."""
    a = np.sort(np.asarray(empirical_a, dtype=float).ravel())
    b = np.sort(np.asarray(empirical_b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")
    # split the error budget evenly between the two bands
    alpha = (1.0 - confidence) / 2.0
    eps_a, eps_b = dkw_epsilon(a.size, alpha), dkw_epsilon(b.size, alpha)
    thresholds = np.unique(np.concatenate([a, b]))
    gaps = upper_tail(a, thresholds) - upper_tail(b, thresholds)
    verdict = bool(np.all(gaps <= eps_a + eps_b))
    return DominanceReport(thresholds, gaps, eps_a, eps_b, confidence, verdict)


# -- subtree sizes against the product process ---------------------------------------

@dataclass
class SubtreeDominanceRun:
    s0: int
    sizes: np.ndarray        # (trials, t_max + 1) |S_t|
    w: np.ndarray            # (trials, t_max + 1) W_t
    reports: list            # DominanceReport per t = 1..t_max


def subtree_dominance(n: int = 10_000, d: int = 20, k: int = 8, t_max: int = 5,
                      trials: int = 100_000, seed: int = 0,
                      confidence: float = 0.99) -> SubtreeDominanceRun:
    """Compare |S_t| with W_t = |S_0| B_1 ... B_t on one random identifier set.

    The lookup starts at the leftmost leaf and targets 1...1.
    """
    rng = np.random.default_rng(aux_seed(seed, 0))
    values = generate_values("random", n, d, rng)
    trie = IdTrie.from_values(values, d)
    x, y = trie.leaf(0), NodeId.all_ones(d)
    _, sizes = sample_routing_times(trie, x, y, k, trials, rng, record_sizes=True)
    if sizes.shape[1] < t_max + 1:
        pad = np.zeros((trials, t_max + 1 - sizes.shape[1]), dtype=sizes.dtype)
        sizes = np.hstack([sizes, pad])
    sizes = sizes[:, : t_max + 1]
    s0 = int(sizes[0, 0])
    w = sample_w_paths(s0, k, t_max, np.random.default_rng(aux_seed(seed, 1)), trials)
    reports = [dominance_test(sizes[:, t], w[:, t], confidence) for t in range(1, t_max + 1)]
    return SubtreeDominanceRun(s0, sizes, w, reports)


# -- routing-time tails against n B_1 ... B_t -----------------------------------------

UNION_FACTOR = {"t_fixed_pair": 0, "t_polar": 0, "s_sizes": 0, "t_sup_y": 1, "t_sup_xy": 2}


@dataclass
class TailRow:
    t: int
    routing_tail: float
    product_tail: float
    analytic_bound: float
    routing_eps: float
    product_eps: float

    @property
    def slack(self) -> float:
        return self.routing_eps + self.product_eps

    @property
    def empirical_ok(self) -> bool:
        return self.routing_tail <= self.product_tail + self.slack

    @property
    def analytic_ok(self) -> bool:
        # the bound is on the true product tail; the estimate may overshoot by its band
        return self.product_tail <= self.analytic_bound + self.product_eps

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "routing_tail": self.routing_tail,
            "product_tail": self.product_tail,
            "analytic_bound": self.analytic_bound,
            "slack": self.slack,
            "empirical_ok": self.empirical_ok,
            "analytic_ok": self.analytic_ok,
        }


def product_tail_samples(n: int, k: int, t_max: int, trials: int, rng) -> np.ndarray:
    """Indicator columns of n B_1 ... B_t >= 1 for t = 0..t_max, shape (trials, t_max + 1)."""
    out = np.ones((trials, t_max + 1), dtype=bool)
    if t_max:
        prods = np.cumprod(sample_beta_min(k, rng, size=(trials, t_max)), axis=1)
        out[:, 1:] = n * prods >= 1
    return out


def tail_comparison(config: ExperimentConfig, t_values, confidence: float = 0.99,
                    workers: int = 1, hop_offset: int = 1) -> list[TailRow]:
    """Empirical P{T >= t + hop_offset} next to P{n B_1...B_t >= 1} and its moment bound.

    A lookup makes its (t+1)-th hop exactly when S_t is nonempty, and
    |S_t| <= n B_1...B_t in distribution, so the bound that actually holds pairs
    the product of t factors with T >= t + 1 (``hop_offset=1``). Pass
    ``hop_offset=0`` for the unshifted pairing, which fails for small t.

    For sup-type measurements the product side is multiplied by n (sup over y)
    or n^2 (sup over x and y), the union-bound factors.
    """
    if config.measurement not in UNION_FACTOR:
        raise ValueError(f"no routing-time tail for measurement {config.measurement!r}")
    if hop_offset < 0:
        raise ValueError(f"hop_offset must be >= 0, got {hop_offset}")
    t_values = sorted(set(int(t) for t in t_values))
    result = run_experiment(config, workers=workers)
    n, k = result.n, result.k
    times = np.sort(np.asarray(result.values))
    power = UNION_FACTOR[config.measurement]
    factor = float(n) ** power
    rng = np.random.default_rng(aux_seed(config.master_seed, 3))
    hits = product_tail_samples(n, k, max(t_values), config.trials, rng)
    alpha = (1.0 - confidence) / 2.0
    routing_eps = dkw_epsilon(times.size, alpha)
    product_eps = factor * dkw_epsilon(config.trials, alpha)
    rows = []
    for t in t_values:
        bound = min(1.0, factor * optimized_tail_bound(n, k, t)[0])
        rows.append(TailRow(
            t=t,
            routing_tail=float(upper_tail(times, t + hop_offset)),
            product_tail=min(1.0, factor * float(hits[:, t].mean())),
            analytic_bound=bound,
            routing_eps=routing_eps,
            product_eps=product_eps,
        ))
    return rows
