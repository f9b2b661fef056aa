"""The d-bit identifier space and its XOR metric.

Identifiers are stored as a packed Python integer plus an explicit bit count,
so d can be anything from 1 to 160 (or beyond) without a fixed word size. Bit 1
of an identifier is its most significant bit; 1-branches sort to the right.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DimensionError, IdParseError, UndefinedBucketError


@dataclass(frozen=True, order=True, slots=True)
class NodeId:
    value: int
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be positive, got {self.d}")
        if not 0 <= self.value < (1 << self.d):
            raise ValueError(f"value {self.value} does not fit in {self.d} bits")

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> NodeId:
        if not bits:
            raise ValueError("empty bit sequence")
        value = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"bits must be 0 or 1, got {b!r}")
            value = (value << 1) | b
        return cls(value, len(bits))

    @classmethod
    def from_str(cls, text: str, d: int | None = None) -> NodeId:
        """Parse a binary string, or hex when ``d`` is given and ``len(text) == d // 4``."""
        text = text.strip()
        if d is None or len(text) == d:
            if not text or set(text) - {"0", "1"}:
                raise ValueError(f"not a binary string: {text!r}")
            return cls(int(text, 2), len(text))
        if d % 4 == 0 and len(text) == d // 4:
            return cls(int(text, 16), d)
        raise ValueError(f"{text!r} is neither {d} binary digits nor {d // 4} hex digits")

    @classmethod
    def all_ones(cls, d: int) -> NodeId:
        return cls((1 << d) - 1, d)

    @classmethod
    def all_zeros(cls, d: int) -> NodeId:
        return cls(0, d)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> (self.d - 1 - i)) & 1 for i in range(self.d))

    def bit(self, i: int) -> int:
        """The i-th bit, 1-based from the most significant end."""
        return (self.value >> (self.d - i)) & 1

    def prefix(self, length: int) -> int:
        return self.value >> (self.d - length)

    def to_bin(self) -> str:
        return format(self.value, f"0{self.d}b")

    def to_hex(self) -> str:
        return format(self.value, f"0{-(-self.d // 4)}x")

    def __str__(self):
        return self.to_bin() if self.d <= 32 else self.to_hex()


def _check_dims(*ids: NodeId) -> int:
    d = ids[0].d
    for other in ids[1:]:
        if other.d != d:
            raise DimensionError(f"mismatched id lengths: {d} vs {other.d}")
    return d


def xor_distance(x: NodeId, y: NodeId) -> int:
    _check_dims(x, y)
    return x.value ^ y.value


def common_prefix_len(x: NodeId, y: NodeId) -> int:
    d = _check_dims(x, y)
    return d - (x.value ^ y.value).bit_length()


def bucket_index(x: NodeId, y: NodeId) -> int:
    """Index i of the distance class D_i(x) holding y, i.e. 2^(i-1) <= delta(x, y) < 2^i."""
    _check_dims(x, y)
    diff = x.value ^ y.value
    if diff == 0:
        raise UndefinedBucketError(f"{x} has no bucket for itself")
    return diff.bit_length()


def polar_opposite(x: NodeId) -> NodeId:
    return NodeId(x.value ^ ((1 << x.d) - 1), x.d)


class Ordering(enum.IntEnum):
    CLOSER = -1
    EQUAL = 0
    FARTHER = 1


def compare_by_distance(a: NodeId, b: NodeId, target: NodeId) -> Ordering:
    """Order ``a`` against ``b`` by XOR distance to ``target``.

    Only the highest bit where a and b differ matters: whichever of the two
    agrees with the target there is closer.
    """
    _check_dims(a, b, target)
    diff = a.value ^ b.value
    if diff == 0:
        return Ordering.EQUAL
    top = diff.bit_length() - 1
    if ((a.value ^ target.value) >> top) & 1:
        return Ordering.FARTHER
    return Ordering.CLOSER


def distance_class(x: NodeId, i: int, universe: Iterable[NodeId]) -> list[NodeId]:
    """Members of ``universe`` at distance in [2^(i-1), 2^i) from x (linear scan)."""
    lo, hi = 1 << (i - 1), 1 << i
    return [y for y in universe if lo <= xor_distance(x, y) < hi]


# -- text format -------------------------------------------------------------

def parse_ids(lines: Iterable[str], d: int | None = None, path=None) -> list[NodeId]:
    """Parse one identifier per line (binary of length d, or hex of length d/4).

    Blank lines and ``#`` comments are skipped. When ``d`` is omitted it is taken
    from the first line, which must then be binary.
    """
    ids = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if d is None:
            if set(text) - {"0", "1"}:
                raise IdParseError(
                    f"cannot infer d from non-binary id {text!r}; pass d explicitly",
                    lineno, path)
            d = len(text)
        if len(text) == d and not set(text) - {"0", "1"}:
            ids.append(NodeId(int(text, 2), d))
            continue
        if d % 4 == 0 and len(text) == d // 4:
            try:
                ids.append(NodeId(int(text, 16), d))
                continue
            except ValueError:
                raise IdParseError(f"invalid hex id {text!r}", lineno, path) from None
        expected = f"{d} binary digits" + (f" or {d // 4} hex digits" if d % 4 == 0 else "")
        raise IdParseError(f"expected {expected}, got {text!r} (length {len(text)})",
                           lineno, path)
    return ids


def read_id_file(path, d: int | None = None) -> list[NodeId]:
    path = Path(path)
    with path.open() as fh:
        return parse_ids(fh, d=d, path=path)


def format_ids(ids: Iterable[NodeId], hex: bool = False) -> str:
    return "".join((x.to_hex() if hex else x.to_bin()) + "\n" for x in ids)
