"""The random routing graph: k-bucket filling, greedy alpha=1 lookups, traces.

Two engines produce routing paths:

* :func:`route` walks a persistently built :class:`Network`, scanning the
  buckets of the current node for the neighbour closest to the target.
* :func:`simulate_routing_process` never builds buckets. At each hop it takes
  the highest subtree holding leaves closer to the target than the current
  node, draws up to k of its leaves, and jumps to the closest. Every bucket a
  lookup touches is touched once, so drawing it fresh gives the same law.

:func:`sample_routing_times` is a vectorised form of the second engine for
large trial counts.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import EmptySubtreeError, MissingNodeError
from .idspace import NodeId
from .trie import IdTrie, build_trie, sample_leaves


@dataclass(frozen=True)
class RoutingTrace:
    target: NodeId
    hops: tuple[NodeId, ...]
    # |S_t| for t = 0..T; the last entry is always 0
    subtree_sizes: tuple[int, ...]
    # depth of the lowest common ancestor of z_t and the closest leaf to target
    hop_depths: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.hops) - 1

    @property
    def hop_advances(self) -> tuple[int, ...]:
        """R_t = L_t - L_(t-1), the depth gained by each hop."""
        h = self.hop_depths
        return tuple(b - a for a, b in zip(h, h[1:]))

    def dump(self) -> str:
        """One line per hop: index, id (hex), LCA depth with the endpoint, |S_t|."""
        rows = []
        for t, (z, depth, size) in enumerate(zip(self.hops, self.hop_depths, self.subtree_sizes)):
            rows.append(f"{t}\t{z.to_hex()}\t{depth}\t{size}")
        return "\n".join(rows) + "\n"


@dataclass
class Network:
    trie: IdTrie
    k: int
    # buckets[j][i] holds the sampled members of D_i for the leaf at position j;
    # index 0 is unused so that i runs 1..d as in the bucket numbering
    buckets: list[list[tuple[int, ...]]] = field(repr=False)

    @property
    def n(self) -> int:
        return self.trie.n

    @property
    def d(self) -> int:
        return self.trie.d

    def bucket(self, x: NodeId, i: int) -> list[NodeId]:
        j = self.trie.index_of(x)
        return [NodeId(v, self.d) for v in self.buckets[j][i]]

    def neighbors(self, x: NodeId) -> set[NodeId]:
        j = self.trie.index_of(x)
        return {NodeId(v, self.d) for b in self.buckets[j] for v in b}

    def out_edges(self, j: int) -> Iterable[int]:
        index = self.trie.index
        return (index[v] for b in self.buckets[j] for v in b)


def build_network(ids, k: int, rng: np.random.Generator) -> Network:
    """Fill every k-bucket of every node uniformly at random without replacement.

    ``ids`` may be an iterable of NodeIds or an already built IdTrie.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    trie = ids if isinstance(ids, IdTrie) else build_trie(ids)
    keys, d = trie.keys, trie.d
    # numpy gather is much faster than a per-element genexpr for large k
    arr = np.asarray(keys, dtype=np.int64) if d <= 62 else np.asarray(keys, dtype=object)
    empty = ()
    buckets = []
    for x in keys:
        row = [empty] * (d + 1)
        for i in range(1, d + 1):
            ref = trie.subtree(d - i + 1, (x >> (i - 1)) ^ 1)
            if ref is None:
                continue
            if ref.size <= k:
                row[i] = tuple(keys[ref.lo:ref.hi])
            else:
                picks = rng.choice(ref.size, size=k, replace=False)
                row[i] = tuple(arr[ref.lo + picks].tolist())
        buckets.append(row)
    return Network(trie, k, buckets)


def closest_node(network, y: NodeId) -> NodeId:
    """The member minimising XOR distance to ``y``; accepts a Network or an IdTrie."""
    trie = network.trie if isinstance(network, Network) else network
    return trie.leaf(trie.closest_index(trie._value(y)))


def _route_values(network: Network, x: int, y: int) -> list[int]:
    index = network.trie.index
    buckets = network.buckets
    z = x
    hops = [z]
    while True:
        dist = z ^ y
        if dist == 0:
            break
        row = buckets[index[z]]
        # members of D_i with i above the class of y are all farther than z, and a
        # nonempty class-i bucket always beats every lower one, so the union argmin
        # can be read off the first nonempty bucket scanning down from i
        i = dist.bit_length()
        best = None
        if row[i]:
            best = min(row[i], key=y.__xor__)
        else:
            lower = [v for b in row[1:i] for v in b]
            if lower:
                best = min(lower, key=y.__xor__)
        if best is None or best ^ y >= dist:
            break
        z = best
        hops.append(z)
    return hops


def route(network: Network, x: NodeId, y: NodeId) -> RoutingTrace:
    """Greedy lookup from ``x`` for ``y``, one query per round."""
    trie = network.trie
    if x not in trie:
        raise MissingNodeError(f"{x} is not a node of the network")
    yv = trie._value(y)
    hops = _route_values(network, x.value, yv)
    return _make_trace(trie, hops, y)


def _make_trace(trie: IdTrie, hops: list[int], y: NodeId) -> RoutingTrace:
    d = trie.d
    closest = trie.keys[trie.closest_index(y.value)]
    sizes, depths = [], []
    for z in hops:
        ref = trie.right_subtree_toward(z, closest)
        sizes.append(0 if ref is None else ref.size)
        depths.append(d - (z ^ closest).bit_length())
    return RoutingTrace(
        target=y,
        hops=tuple(NodeId(v, d) for v in hops),
        subtree_sizes=tuple(sizes),
        hop_depths=tuple(depths),
    )


def simulate_routing_process(trie: IdTrie, x: NodeId, y: NodeId, k: int,
                             rng: np.random.Generator) -> RoutingTrace:
    """Run the hop recursion directly on the trie, drawing each bucket fresh."""
    trie.index_of(x)
    closest = trie.keys[trie.closest_index(trie._value(y))]
    yv = y.value
    d = trie.d
    z = x.value
    hops, sizes, depths = [z], [], []
    while True:
        depths.append(d - (z ^ closest).bit_length())
        s = trie.right_subtree_toward(z, closest)
        if s is None:
            sizes.append(0)
            break
        sizes.append(s.size)
        picks = sample_leaves(trie, s, k, rng)
        z = min((p.value for p in picks), key=yv.__xor__)
        hops.append(z)
    return RoutingTrace(
        target=y,
        hops=tuple(NodeId(v, d) for v in hops),
        subtree_sizes=tuple(sizes),
        hop_depths=tuple(depths),
    )


def s_sequence(trace: RoutingTrace) -> list[int]:
    return list(trace.subtree_sizes)


# -- vectorised engine ----------------------------------------------------------

def closeness_ranks(trie: IdTrie, y: int) -> tuple[np.ndarray, np.ndarray]:
    """Leaves ordered by XOR distance to ``y``, and |S(z)| for each in that order.

    Returns ``(order, pool)`` where ``order[q]`` is the trie position of the
    q-th closest leaf and ``pool[q]`` is the size of its next-hop subtree. The
    next-hop subtree of any leaf is exactly the ``pool[q]`` closest leaves.
    """
    keys = trie.keys
    order = sorted(range(trie.n), key=lambda j: keys[j] ^ y)
    closest = keys[order[0]]
    pool = np.empty(trie.n, dtype=np.int64)
    for q, j in enumerate(order):
        ref = trie.right_subtree_toward(keys[j], closest)
        pool[q] = 0 if ref is None else ref.size
    return np.asarray(order, dtype=np.int64), pool


def sample_subset_min(s: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Minimum of a uniform random min(k, s)-subset of {0, ..., s-1}, row-wise.

    Subsets are drawn with Floyd's algorithm, vectorised over rows.
    """
    s = np.asarray(s, dtype=np.int64)
    rows = s.shape[0]
    m = np.minimum(s, k)
    chosen = np.full((rows, k), np.iinfo(np.int64).max, dtype=np.int64)
    for u in range(k):
        active = np.nonzero(u < m)[0]
        if active.size == 0:
            break
        j = s[active] - m[active] + u
        t = rng.integers(0, j + 1)
        dup = (chosen[active, :u] == t[:, None]).any(axis=1)
        chosen[active, u] = np.where(dup, j, t)
    return chosen.min(axis=1)


def sample_routing_times(trie: IdTrie, x: NodeId, y: NodeId, k: int, trials: int,
                         rng: np.random.Generator, record_sizes: bool = False):
    """Hop counts of ``trials`` independent lookups from x for y.

    With ``record_sizes`` also returns a (trials, T_max + 1) array whose column t
    holds |S_t| (zero once a lookup has finished).
    """
    if x not in trie:
        raise MissingNodeError(f"{x} is not a leaf of the trie")
    order, pool = closeness_ranks(trie, trie._value(y))
    start = int(np.nonzero(order == trie.index_of(x))[0][0])
    q = np.full(trials, start, dtype=np.int64)
    hops = np.zeros(trials, dtype=np.int64)
    sizes = [pool[q]] if record_sizes else None
    active = np.nonzero(pool[q] > 0)[0]
    while active.size:
        s = pool[q[active]]
        q[active] = sample_subset_min(s, k, rng)
        hops[active] += 1
        if record_sizes:
            sizes.append(pool[q])
        active = active[pool[q[active]] > 0]
    if record_sizes:
        return hops, np.stack(sizes, axis=1)
    return hops


# -- graph checks ----------------------------------------------------------------

def adjacency(network: Network) -> list[list[int]]:
    return [sorted(set(network.out_edges(j))) for j in range(network.n)]


def _reaches_all(adj: list[list[int]], start: int) -> bool:
    seen = [False] * len(adj)
    seen[start] = True
    queue = deque([start])
    count = 1
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count == len(adj)


def is_strongly_connected(network: Network) -> bool:
    """Forward and backward reachability from one vertex."""
    if network.n == 0:
        raise EmptySubtreeError("empty network")
    adj = adjacency(network)
    if not _reaches_all(adj, 0):
        return False
    rev = [[] for _ in adj]
    for u, vs in enumerate(adj):
        for v in vs:
            rev[v].append(u)
    return _reaches_all(rev, 0)
