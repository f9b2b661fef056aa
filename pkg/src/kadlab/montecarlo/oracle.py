"""Exact routing-time distributions for tiny networks, by exhaustive enumeration.

Nothing here touches the trie or the routing engines: distance classes are
found by linear scan over the identifier set, every possible filling of the
current node's buckets is enumerated with equal weight, and the next hop is the
closest neighbour by plain XOR distance. A node's buckets are consulted at most
once per lookup (distances strictly decrease), so the law of the remaining path
depends only on the current node and can be memoised.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

from scipy import integrate

from ..errors import InfeasibleError
from ..idspace import NodeId

ENUMERATION_LIMIT = 10**6


def _classes(z: int, ids: list[int], d: int) -> list[list[int]]:
    out = []
    for i in range(1, d + 1):
        lo, hi = 1 << (i - 1), 1 << i
        out.append([v for v in ids if lo <= (v ^ z) < hi])
    return out


def _fillings(classes, k):
    options = [list(itertools.combinations(c, min(k, len(c)))) for c in classes if c]
    return options, math.prod(len(o) for o in options)


def brute_force_t_distribution(ids, k: int, x: NodeId, y: NodeId) -> dict[int, Fraction]:
    """Exact pmf of the hop count of a lookup from x for y.

    Raises InfeasibleError when the product of bucket-filling counts over the
    nodes the lookup could visit exceeds ENUMERATION_LIMIT.
    """
    values = sorted({u.value for u in ids})
    d = x.d
    yv = y.value
    if x.value not in values:
        raise ValueError(f"{x} is not one of the ids")
    # any node the lookup can visit is x itself or strictly closer to y
    reachable = [v for v in values if (v ^ yv) <= (x.value ^ yv)]
    total = 1
    for v in reachable:
        total *= _fillings(_classes(v, values, d), k)[1]
        if total > ENUMERATION_LIMIT:
            raise InfeasibleError(
                f"enumeration needs more than {ENUMERATION_LIMIT} bucket fillings")

    @lru_cache(maxsize=None)
    def pmf_from(z: int) -> tuple[tuple[int, Fraction], ...]:
        options, count = _fillings(_classes(z, values, d), k)
        acc: dict[int, Fraction] = {}
        weight = Fraction(1, count)
        for choice in itertools.product(*options):
            neighbours = [v for bucket in choice for v in bucket]
            best = min(neighbours, key=lambda v: v ^ yv) if neighbours else None
            if best is None or (best ^ yv) >= (z ^ yv):
                acc[0] = acc.get(0, 0) + weight
                continue
            for t, p in pmf_from(best):
                acc[t + 1] = acc.get(t + 1, 0) + weight * p
        return tuple(sorted(acc.items()))

    return dict(pmf_from(x.value))


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(float(p.get(t, 0)) - float(q.get(t, 0))) for t in keys)


def histogram(samples) -> dict[int, float]:
    counts: dict[int, int] = {}
    for s in samples:
        counts[int(s)] = counts.get(int(s), 0) + 1
    total = sum(counts.values())
    return {t: c / total for t, c in counts.items()}


def tail_of(pmf: dict, t: int):
    return sum((p for s, p in pmf.items() if s >= t), Fraction(0))


def _ids(d, *texts):
    return tuple(NodeId(int(s, 2), d) for s in texts)


# (ids, k, source, target) with n <= 6 and d <= 4
CATALOG = [
    (_ids(3, "000", "111"), 1, "000", "111"),
    (_ids(3, "000", "011", "101"), 1, "000", "111"),
    (_ids(3, "001", "010", "100", "111"), 1, "001", "111"),
    (_ids(3, "000", "001", "010", "011", "110"), 1, "000", "111"),
    (_ids(3, "000", "010", "100", "101", "110", "111"), 1, "000", "111"),
    (_ids(3, "000", "001", "010", "011", "100", "101"), 2, "000", "111"),
    (_ids(3, "001", "011", "100", "110"), 2, "110", "000"),
    (_ids(4, "0000", "0110", "1011", "1111"), 1, "0000", "1111"),
    (_ids(4, "0001", "0010", "0100", "1000", "1110"), 1, "0001", "1111"),
    (_ids(4, "0000", "0001", "0010", "0011", "1100", "1111"), 1, "0000", "1111"),
    (_ids(4, "0000", "0100", "1000", "1010", "1100", "1110"), 1, "0000", "1111"),
    (_ids(4, "0011", "0101", "0110", "1001", "1010", "1100"), 1, "0011", "1111"),
    (_ids(4, "0000", "0101", "1010", "1011", "1101", "1110"), 2, "0000", "1111"),
    (_ids(4, "0000", "0001", "0100", "0111", "1000", "1111"), 2, "0001", "1110"),
    (_ids(4, "0010", "0111", "1001", "1100", "1101"), 1, "0010", "1011"),
    (_ids(4, "0000", "0011", "0101", "0110", "1001", "1010"), 1, "1010", "0000"),
    (_ids(4, "0001", "0011", "0111", "1111"), 1, "0001", "1000"),
    (_ids(4, "1000", "1001", "1010", "1011", "1100", "1101"), 2, "1000", "0111"),
    (_ids(4, "0000", "0110", "1001", "1100", "1110", "1111"), 2, "0000", "1101"),
    (_ids(4, "0100", "0101", "0110", "0111", "1000", "1011"), 1, "0100", "1010"),
]


def catalog_entries():
    """Catalog rows with endpoints as NodeIds: (ids, k, x, y)."""
    out = []
    for ids, k, src, dst in CATALOG:
        d = ids[0].d
        out.append((ids, k, NodeId(int(src, 2), d), NodeId(int(dst, 2), d)))
    return out


# -- P{n B_1 ... B_t >= 1} by quadrature ----------------------------------------------

def product_tail_exact(n: float, k: int, t: int) -> float:
    """P{B_1 ... B_t >= 1/n} for i.i.d. minima of k uniforms, by nested quadrature.

    Uses P{B >= u} = (1 - u)^k and conditions on the first factor; the closed form
    is used at depth one so t levels cost t - 1 nested integrals.
    """
    if t == 0:
        return 1.0

    def tail(c: float, depth: int) -> float:
        if c <= 0:
            return 1.0
        if c >= 1:
            return 0.0
        if depth == 1:
            return (1.0 - c) ** k
        # P{B * rest >= c} = E[P{rest >= c / B}], and B must be at least c
        val, _ = integrate.quad(
            lambda b: k * (1.0 - b) ** (k - 1) * tail(c / b, depth - 1),
            c, 1.0, epsabs=1e-12, epsrel=1e-10, limit=200)
        return val

    return tail(1.0 / n, t)


def exhaustive_tail_check(n: int, d: int, k: int):
    """Worst case over every n-subset of {0,1}^d and every source, target 1...1.

    Rotating the hypercube maps any target to 1...1 while permuting identifier
    sets, so this covers every (id set, source, target). Returns a list of
    (t, max P{T >= t}, P{n B_1...B_t >= 1}).
    """
    y = NodeId.all_ones(d)
    worst: dict[int, Fraction] = {}
    for combo in itertools.combinations(range(1 << d), n):
        ids = [NodeId(v, d) for v in combo]
        for x in ids:
            pmf = brute_force_t_distribution(ids, k, x, y)
            for t in range(1, max(pmf) + 1):
                worst[t] = max(worst.get(t, Fraction(0)), tail_of(pmf, t))
    return [(t, worst[t], product_tail_exact(n, k, t)) for t in sorted(worst)]
