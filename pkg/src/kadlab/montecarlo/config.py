"""Experiment configuration: validation, k rules, and the flat key = value file format.

A config file holds one ``key = value`` per line; ``#`` starts a comment.
Keys are the field names of :class:`ExperimentConfig`, for example::

    model = random-ids
    id_source = random
    n = 131072
    d = 32
    k = 8
    trials = 2000
    master_seed = 7
    measurement = t_polar
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from ..errors import ConfigError
from .ids import SOURCES

MODELS = ("random-ids", "deterministic-ids")
MEASUREMENTS = ("t_fixed_pair", "t_sup_y", "t_sup_xy", "t_polar", "s_sizes", "t_n")
K_RULES = ("fixed", "log_n", "n_pow")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "random-ids"
    id_source: str = "random"
    n: int | None = 1024
    d: int = 32
    k: int = 8
    k_rule: str = "fixed"
    theta: float | None = None
    trials: int = 100
    master_seed: int = 0
    measurement: str = "t_polar"
    prefix: str | None = None
    fraction: float | None = None
    ids_file: str | None = None
    source: str | None = None
    target: str | None = None
    pairs: int = 4096

    def problems(self) -> list[str]:
        out = []
        if self.model not in MODELS:
            out.append(f"model must be one of {MODELS}, got {self.model!r}")
        if self.id_source not in SOURCES:
            out.append(f"id_source must be one of {SOURCES}, got {self.id_source!r}")
        if self.measurement not in MEASUREMENTS:
            out.append(f"measurement must be one of {MEASUREMENTS}, got {self.measurement!r}")
        if self.k_rule not in K_RULES:
            out.append(f"k_rule must be one of {K_RULES}, got {self.k_rule!r}")
        if self.id_source == "file":
            if not self.ids_file:
                out.append("id_source=file needs ids_file")
        elif self.n is None or self.n < 1:
            out.append(f"n must be a positive integer, got {self.n}")
        if self.d < 1:
            out.append(f"d must be positive, got {self.d}")
        elif self.n is not None and self.n >= 1:
            if self.n > 2 ** self.d:
                out.append(f"n={self.n} exceeds the 2^{self.d} available ids")
            if self.d < math.ceil(math.log2(self.n)):
                out.append(f"d={self.d} is below log2(n)={math.log2(self.n):.3g}; "
                           "the model assumes d >= log2 n")
        if self.measurement == "t_n" and self.n is not None and self.n < 2:
            out.append("t_n needs n >= 2")
        if self.k_rule == "fixed" and self.k < 1:
            out.append(f"k must be at least 1, got {self.k}")
        if self.k_rule == "n_pow" and (self.theta is None or not 0 < self.theta < 1):
            out.append(f"k_rule=n_pow needs theta in (0, 1), got {self.theta}")
        if self.trials < 1:
            out.append(f"trials must be at least 1, got {self.trials}")
        if self.pairs < 1:
            out.append(f"pairs must be at least 1, got {self.pairs}")
        if self.id_source == "clustered":
            if self.prefix is None or set(self.prefix) - {"0", "1"}:
                out.append(f"clustered ids need a binary prefix, got {self.prefix!r}")
            elif len(self.prefix) > self.d:
                out.append(f"prefix longer than d={self.d}")
            if self.fraction is None or not 0 <= self.fraction <= 1:
                out.append(f"clustered ids need fraction in [0, 1], got {self.fraction}")
        if self.model == "random-ids" and self.id_source != "random":
            out.append("the random-ids model draws ids uniformly; use id_source=random")
        return out

    def validate(self) -> ExperimentConfig:
        problems = self.problems()
        if problems:
            raise ConfigError(problems)
        return self

    def resolve_k(self, n: int | None = None) -> int:
        n = self.n if n is None else n
        if self.k_rule == "fixed":
            return self.k
        if self.k_rule == "log_n":
            return max(1, math.ceil(math.log(n)))
        # guard against n**theta landing a hair above an integer
        return max(1, math.ceil(n ** self.theta - 1e-9))

    def as_dict(self) -> dict:
        return asdict(self)

    def with_(self, **changes) -> ExperimentConfig:
        return replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    if raw.lower() in ("none", "null", ""):
        return None
    if "int" in kind:
        return int(raw, 0)
    if "float" in kind:
        return float(raw)
    return raw


def config_from_mapping(mapping: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Build a config from string or typed values; every bad key or value is reported."""
    base = base or ExperimentConfig()
    problems, changes = [], {}
    for key, value in mapping.items():
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            problems.append(f"unknown config key {key!r}")
            continue
        if isinstance(value, str):
            try:
                value = _coerce(key, value.strip())
            except ValueError:
                problems.append(f"bad value for {key}: {value!r}")
                continue
        changes[key] = value
    if problems:
        raise ConfigError(problems)
    return replace(base, **changes)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    out, problems = {}, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"{source}:{lineno}: expected key = value, got {raw.strip()!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    if problems:
        raise ConfigError(problems)
    return out


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    mapping = parse_config_text(path.read_text(), source=str(path))
    mapping.update(overrides or {})
    return config_from_mapping(mapping)


def dump_config(config: ExperimentConfig) -> str:
    return "".join(f"{k} = {'none' if v is None else v}\n" for k, v in config.as_dict().items())
