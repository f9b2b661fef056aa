"""Binary trie over a fixed identifier set.

The trie is kept implicitly as the sorted array of leaf values. A trie node at
depth ``a`` with prefix ``p`` owns exactly the leaves whose top ``a`` bits equal
``p``, and those leaves form one contiguous run of the sorted array. So a
subtree is just an index range ``[lo, hi)``, its leaf count is ``hi - lo``, and
descending one level is a single bisection. Nothing is ever copied per subtree.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, DuplicateIdError, EmptySubtreeError, MissingNodeError
from .idspace import NodeId, common_prefix_len


@dataclass(frozen=True, slots=True)
class SubtreeRef:
    depth: int
    prefix: int
    lo: int
    hi: int

    @property
    def size(self) -> int:
        return self.hi - self.lo


class IdTrie:
    __slots__ = ("keys", "d", "n", "_index")

    def __init__(self, keys: Sequence[int], d: int):
        # keys must already be sorted and distinct; use build_trie() otherwise
        self.keys = keys
        self.d = d
        self.n = len(keys)
        self._index = None

    @classmethod
    def from_values(cls, values: Iterable[int], d: int) -> IdTrie:
        if d <= 62:
            arr = np.sort(np.fromiter(values, dtype=np.int64))
            if arr.size > 1 and not np.all(np.diff(arr)):
                dup = int(arr[1:][np.diff(arr) == 0][0])
                raise DuplicateIdError(f"duplicate id {NodeId(dup, d)}")
            if arr.size and (arr[0] < 0 or arr[-1] >= (1 << d)):
                raise DimensionError(f"id values outside {d}-bit range")
            return cls(arr.tolist(), d)
        keys = sorted(values)
        for a, b in zip(keys, keys[1:]):
            if a == b:
                raise DuplicateIdError(f"duplicate id {NodeId(a, d)}")
        if keys and not (0 <= keys[0] and keys[-1] < (1 << d)):
            raise DimensionError(f"id values outside {d}-bit range")
        return cls(keys, d)

    def __len__(self):
        return self.n

    def __contains__(self, x) -> bool:
        v = self._value(x)
        i = bisect_left(self.keys, v)
        return i < self.n and self.keys[i] == v

    def __iter__(self):
        d = self.d
        return (NodeId(v, d) for v in self.keys)

    def _value(self, x) -> int:
        if isinstance(x, NodeId):
            if x.d != self.d:
                raise DimensionError(f"id has d={x.d}, trie has d={self.d}")
            return x.value
        return int(x)

    def leaf(self, i: int) -> NodeId:
        return NodeId(self.keys[i], self.d)

    def index_of(self, x) -> int:
        v = self._value(x)
        i = bisect_left(self.keys, v)
        if i == self.n or self.keys[i] != v:
            raise MissingNodeError(f"{NodeId(v, self.d)} is not a leaf of this trie")
        return i

    @property
    def index(self) -> dict[int, int]:
        """Value -> position map, built lazily for callers doing many lookups."""
        if self._index is None:
            self._index = {v: i for i, v in enumerate(self.keys)}
        return self._index

    # -- subtrees --------------------------------------------------------

    def root(self) -> SubtreeRef:
        return SubtreeRef(0, 0, 0, self.n)

    def subtree(self, depth: int, prefix: int) -> SubtreeRef | None:
        """The subtree under the node at ``depth`` reached by ``prefix``; None if empty."""
        shift = self.d - depth
        lo = bisect_left(self.keys, prefix << shift)
        hi = bisect_left(self.keys, (prefix + 1) << shift, lo)
        if lo == hi:
            return None
        return SubtreeRef(depth, prefix, lo, hi)

    def children(self, node: SubtreeRef) -> tuple[SubtreeRef | None, SubtreeRef | None]:
        if node.depth == self.d:
            return None, None
        depth = node.depth + 1
        left_prefix = node.prefix << 1
        mid = bisect_left(self.keys, (left_prefix | 1) << (self.d - depth), node.lo, node.hi)
        left = SubtreeRef(depth, left_prefix, node.lo, mid) if mid > node.lo else None
        right = SubtreeRef(depth, left_prefix | 1, mid, node.hi) if node.hi > mid else None
        return left, right

    def count(self, depth: int, prefix: int) -> int:
        ref = self.subtree(depth, prefix)
        return 0 if ref is None else ref.size

    def recount(self, depth: int, prefix: int) -> int:
        """Leaf count by full scan; reference for count()."""
        shift = self.d - depth
        return sum(1 for v in self.keys if v >> shift == prefix)

    def leaves(self, ref: SubtreeRef) -> list[NodeId]:
        d = self.d
        return [NodeId(v, d) for v in self.keys[ref.lo:ref.hi]]

    def closest_index(self, target: int) -> int:
        """Position of the leaf XOR-closest to ``target``, by descending toward its bits."""
        keys, d = self.keys, self.d
        lo, hi = 0, self.n
        if hi == 0:
            raise EmptySubtreeError("empty trie")
        prefix = 0
        for depth in range(d):
            shift = d - depth - 1
            right_start = ((prefix << 1) | 1) << shift
            mid = bisect_left(keys, right_start, lo, hi)
            want = (target >> shift) & 1
            if want:
                take_right = mid < hi
            else:
                take_right = mid == lo
            if take_right:
                lo, prefix = mid, (prefix << 1) | 1
            else:
                hi, prefix = mid, prefix << 1
        return lo

    def right_subtree_toward(self, z: int, closest: int) -> SubtreeRef | None:
        """Highest subtree containing leaves closer than ``z`` to the target.

        ``closest`` is the target's nearest leaf. The subtree hangs below the
        lowest common ancestor of the two leaves, on the side of ``closest``.
        """
        if z == closest:
            return None
        depth = self.d - (z ^ closest).bit_length() + 1
        return self.subtree(depth, closest >> (self.d - depth))


def build_trie(ids: Iterable[NodeId]) -> IdTrie:
    ids = list(ids)
    if not ids:
        raise EmptySubtreeError("cannot build a trie over no ids")
    d = ids[0].d
    for x in ids:
        if x.d != d:
            raise DimensionError(f"mixed id lengths: {d} and {x.d}")
    return IdTrie.from_values((x.value for x in ids), d)


def rightmost_leaf(trie: IdTrie, within: SubtreeRef | None = None) -> NodeId:
    """Largest leaf of ``within`` (default: the whole trie), i.e. the one nearest 1...1."""
    if within is None:
        within = trie.root()
    if within.size <= 0:
        raise EmptySubtreeError("rightmost_leaf of an empty subtree")
    return trie.leaf(within.hi - 1)


def highest_right_subtree(trie: IdTrie, z: NodeId, target: NodeId | None = None) -> SubtreeRef | None:
    """Shallowest nonempty subtree lying to the right of leaf ``z``.

    "Right" is measured toward ``target`` (default all-ones). Returns None when
    ``z`` is already the leaf closest to the target.
    """
    zi = trie.index_of(z)
    if target is None:
        closest = trie.keys[-1]
    else:
        closest = trie.keys[trie.closest_index(trie._value(target))]
    return trie.right_subtree_toward(trie.keys[zi], closest)


def sample_leaves(trie: IdTrie, subtree: SubtreeRef, m: int, rng: np.random.Generator) -> list[NodeId]:
    """Uniform random subset of min(m, size) distinct leaves of ``subtree``."""
    size = subtree.size
    if size <= 0:
        raise EmptySubtreeError("cannot sample from an empty subtree")
    if m >= size:
        return trie.leaves(subtree)
    picks = rng.choice(size, size=m, replace=False)
    keys, d, lo = trie.keys, trie.d, subtree.lo
    return [NodeId(keys[lo + int(j)], d) for j in picks]


def rotate_by_target(obj, y: NodeId):
    """Relabel u -> u XOR complement(y), which sends y to 1...1.

    Accepts a NodeId, an IdTrie, or an iterable of NodeIds and returns the same
    kind of value. After rotation, closeness to y is right-to-left leaf order.
    """
    mask = y.value ^ ((1 << y.d) - 1)
    if isinstance(obj, NodeId):
        if obj.d != y.d:
            raise DimensionError(f"id has d={obj.d}, target has d={y.d}")
        return NodeId(obj.value ^ mask, obj.d)
    if isinstance(obj, IdTrie):
        if obj.d != y.d:
            raise DimensionError(f"trie has d={obj.d}, target has d={y.d}")
        return IdTrie.from_values((v ^ mask for v in obj.keys), obj.d)
    return [rotate_by_target(u, y) for u in obj]


def lca_depth(x: NodeId, y: NodeId) -> int:
    return common_prefix_len(x, y)
