"""Identifier families: uniform random, sequential, clustered, and from file."""

from __future__ import annotations

import numpy as np

from ..errors import CapacityError, IdParseError
from ..idspace import NodeId, read_id_file

SOURCES = ("random", "sequential", "clustered", "file")


def _random_small(n: int, d: int, rng: np.random.Generator, low: int = 0, exclude=()) -> np.ndarray:
    space = 1 << d
    excl = np.fromiter(exclude, dtype=np.int64, count=len(exclude))
    if n > space // 4:
        vals = rng.choice(space, size=min(space, n + excl.size), replace=False) + low
        if excl.size:
            vals = vals[~np.isin(vals, excl)]
        return vals[:n]
    out = np.empty(0, dtype=np.int64)
    while out.size < n:
        draw = rng.integers(0, space, size=n - out.size + 8, dtype=np.int64) + low
        # keep first occurrences, in draw order
        _, first = np.unique(draw, return_index=True)
        draw = draw[np.sort(first)]
        draw = draw[~np.isin(draw, out) & ~np.isin(draw, excl)] if (out.size or excl.size) else draw
        out = np.concatenate([out, draw[: n - out.size]])
    return out


def _random_wide(n: int, d: int, rng: np.random.Generator, low: int = 0, exclude=()) -> list[int]:
    nbytes = (d + 7) // 8
    extra = nbytes * 8 - d
    out: list[int] = []
    seen = set(exclude)
    while len(out) < n:
        v = (int.from_bytes(rng.bytes(nbytes), "big") >> extra) + low
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def random_values(n: int, d: int, rng: np.random.Generator, low: int = 0, exclude=()) -> list[int]:
    """n distinct values drawn uniformly from [low, low + 2^d), in draw order."""
    if n > (1 << d) - len(exclude):
        raise CapacityError(f"cannot draw {n} distinct ids from a {d}-bit space")
    if low + (1 << d) <= 1 << 62:
        return _random_small(n, d, rng, low, exclude).tolist()
    return _random_wide(n, d, rng, low, exclude)


def generate_values(source: str, n: int | None, d: int, rng: np.random.Generator,
                    prefix: str | None = None, fraction: float | None = None,
                    path=None) -> list[int]:
    """Like generate_ids but returns raw integer values (order matters: the first is X_1)."""
    if source == "file":
        values = [x.value for x in read_id_file(path, d=d)]
        if len(set(values)) != len(values):
            raise IdParseError("duplicate ids in file", path=path)
        if n is not None and len(values) != n:
            raise CapacityError(f"{path} holds {len(values)} ids but n={n} was requested")
        return values
    if n is None or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if n > (1 << d):
        raise CapacityError(f"n={n} exceeds the 2^{d} available ids")
    if source == "random":
        return random_values(n, d, rng)
    if source == "sequential":
        return list(range(n))
    if source == "clustered":
        if prefix is None or fraction is None:
            raise ValueError("clustered ids need a prefix and a fraction")
        if set(prefix) - {"0", "1"} or len(prefix) > d:
            raise ValueError(f"prefix must be a binary string of at most {d} bits, got {prefix!r}")
        if not 0 <= fraction <= 1:
            raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
        sub_bits = d - len(prefix)
        inside = round(fraction * n)
        if inside > (1 << sub_bits):
            raise CapacityError(f"{inside} ids do not fit under prefix {prefix}")
        low = int(prefix, 2) << sub_bits if prefix else 0
        clustered = random_values(inside, sub_bits, rng, low=low)
        rest = random_values(n - inside, d, rng, exclude=set(clustered))
        return clustered + rest
    raise ValueError(f"unknown id source {source!r}; expected one of {SOURCES}")


def generate_ids(source: str, n: int | None, d: int, rng: np.random.Generator, **kwargs) -> list[NodeId]:
    return [NodeId(v, d) for v in generate_values(source, n, d, rng, **kwargs)]
