"""Closed-form and numerically optimised routing-time constants.

The leading constants come from the rate function

    h_k(r; offset) = (r + offset) / sum_{i=1..k} log(1 + r/i),

minimised over r > 0. Offset 0 gives c_k = 1/H_k in closed form (h is
increasing, so the infimum is the r -> 0 limit); offsets 1 and 2 give c_k'
and c_k*, which have no closed form and are found by golden-section search.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2

# grid used to confirm that h is unimodal before trusting golden-section search
_PRECHECK_GRID = np.logspace(-6, 6, 241)


@dataclass(frozen=True)
class ConstantsRow:
    k: int
    c_k: float
    c_k_prime: float
    c_k_star: float

    def as_dict(self):
        return asdict(self)


@lru_cache(maxsize=None)
def harmonic(k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    # smallest terms first
    return math.fsum(1.0 / i for i in range(k, 0, -1))


def _log_terms(k: int, r: float) -> float:
    if k <= 64:
        return math.fsum(math.log1p(r / i) for i in range(1, k + 1))
    return float(np.sum(np.log1p(r / np.arange(1, k + 1, dtype=float))))


def rate_h(k: int, offset: int, r: float) -> float:
    if r <= 0:
        raise ValueError(f"rate function needs r > 0, got {r}")
    return (r + offset) / _log_terms(k, r)


def golden_section(f, a: float, b: float, tol: float = 1e-12, max_iter: int = 500):
    """Minimise a unimodal ``f`` on [a, b]; returns (argmin, min)."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * (1 + abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


def _bracket_log(f, start: float = 0.0, step: float = math.log(2), limit: float = 60.0):
    """Bracket a minimum of f(u) by geometric expansion of r = e^u away from ``start``."""
    f0 = f(start)
    up, down = f(start + step), f(start - step)
    if up < f0:
        direction, prev, cur, fcur = 1, start, start + step, up
    elif down < f0:
        direction, prev, cur, fcur = -1, start, start - step, down
    else:
        return start - step, start + step
    while abs(cur) < limit:
        nxt = cur + direction * step
        fn = f(nxt)
        if fn >= fcur:
            return (prev, nxt) if direction > 0 else (nxt, prev)
        prev, cur, fcur = cur, nxt, fn
        step *= 2
    raise ArithmeticError("no interior minimum found while bracketing")


def _is_unimodal(values: np.ndarray) -> bool:
    i = int(np.argmin(values))
    return bool(np.all(np.diff(values[: i + 1]) <= 0) and np.all(np.diff(values[i:]) >= 0))


def minimize_rate(k: int, offset: int) -> tuple[float, float]:
    """Minimiser and minimum of h_k(r; offset) over r > 0, for offset >= 1."""
    if offset < 1:
        raise ValueError("offset 0 has no interior minimiser; use constant(k, 0)")

    def f(u):
        return rate_h(k, offset, math.exp(u))

    grid = np.array([rate_h(k, offset, r) for r in _PRECHECK_GRID])
    if _is_unimodal(grid):
        lo, hi = _bracket_log(f)
    else:
        # fall back to the neighbourhood of the best grid point
        i = int(np.argmin(grid))
        lo = math.log(_PRECHECK_GRID[max(i - 1, 0)])
        hi = math.log(_PRECHECK_GRID[min(i + 1, len(_PRECHECK_GRID) - 1)])
    u, val = golden_section(f, lo, hi, tol=1e-13)
    return math.exp(u), val


@lru_cache(maxsize=None)
def constant(k: int, offset: int) -> float:
    """c_k (offset 0), c_k' (offset 1) or c_k* (offset 2)."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if offset == 0:
        return 1.0 / harmonic(k)
    if offset not in (1, 2):
        raise ValueError(f"offset must be 0, 1 or 2, got {offset}")
    return minimize_rate(k, offset)[1]


def constants_row(k: int) -> ConstantsRow:
    return ConstantsRow(k, constant(k, 0), constant(k, 1), constant(k, 2))


def constants_table(ks=range(1, 11)) -> list[ConstantsRow]:
    return [constants_row(k) for k in ks]


# -- moments and tail bounds ------------------------------------------------------

def log_beta_moment(k: int, r: float) -> float:
    """log E[B^r] for B the minimum of k uniforms: log(k! / prod_{i<=k} (r + i))."""
    if r <= 0:
        raise ValueError(f"moment order must be positive, got {r}")
    if k <= 64:
        s = math.fsum(math.log(r + i) for i in range(1, k + 1))
    else:
        s = float(np.sum(np.log(r + np.arange(1, k + 1, dtype=float))))
    return math.lgamma(k + 1) - s


def beta_product_moment(k: int, r: float, t: int) -> float:
    """E[(B_1 ... B_t)^r] for i.i.d. minima of k uniforms."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return math.exp(t * log_beta_moment(k, r))


def tail_bound(n: float, k: int, t: int, r: float) -> float:
    """Markov/moment bound on P{n B_1 ... B_t >= 1}, clamped to [0, 1]."""
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    log_b = t * log_beta_moment(k, r) + r * math.log(n)
    return 1.0 if log_b >= 0 else math.exp(log_b)


def optimized_tail_bound(n: float, k: int, t: int) -> tuple[float, float]:
    """Best moment bound over r > 0; returns (bound, r).

    The log of the bound is convex in r with slope log n - t H_k at r = 0, so
    when that slope is nonnegative the infimum is the trivial bound 1.
    """
    if t == 0 or math.log(n) - t * harmonic(k) >= 0:
        return 1.0, 0.0

    def f(u):
        r = math.exp(u)
        return t * log_beta_moment(k, r) + r * math.log(n)

    lo, hi = _bracket_log(f, start=0.0)
    u, val = golden_section(f, lo, hi, tol=1e-12)
    return min(1.0, math.exp(val)), math.exp(u)


# -- the per-hop depth advance G -------------------------------------------------

def g1_cdf(k: int, i: int) -> float:
    """P{G_1 <= i} = (1 - 2^-i)^k."""
    if i < 0:
        raise ValueError(f"i must be nonnegative, got {i}")
    if i == 0:
        return 0.0
    return math.exp(k * math.log1p(-(2.0 ** -i)))


def g1_tail(k: int, i: int) -> float:
    """P{G_1 > i}, computed without cancellation."""
    if i == 0:
        return 1.0
    return -math.expm1(k * math.log1p(-(2.0 ** -i)))


@lru_cache(maxsize=None)
def expected_g1(k: int) -> float:
    """E[G_1] = sum_{i>=0} P{G_1 > i}.

    Truncated once k 2^-i < 1e-15; by Bernoulli's inequality that quantity
    bounds each omitted term.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    terms = []
    i = 0
    while True:
        terms.append(g1_tail(k, i))
        i += 1
        if k * 2.0 ** -i < 1e-15:
            break
    return math.fsum(terms)


def g_of_k(k: int) -> float:
    return math.log(2) * expected_g1(k)
