"""Experiment configuration: flat ``key = value`` files plus command-line overrides."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

from .mapping import format_positions, parse_positions

KINDS = ("brute_force", "surrogate_select", "surrogate_permute", "link_sim", "sorted_sim", "fig1_table")
ESTIMATORS = ("perfect", "mmse", "linear_interp")
CHECK_NODES = ("exact", "minsum")

# required keys beyond ``kind``, ``n``, ``k`` and ``seed``
_REQUIRED = {
    "brute_force": ("v", "p"),
    "surrogate_select": ("v", "p"),
    "surrogate_permute": (),
    "link_sim": ("v",),
    "sorted_sim": (),
    "fig1_table": ("p",),
}
_DEFAULT_FRAMES = {
    "brute_force": 1_000_000,
    "fig1_table": 1_000_000,
    "surrogate_select": 10_000,
    "surrogate_permute": 10_000,
    "link_sim": 100_000,
    "sorted_sim": 100_000,
}
_DEFAULT_MAX_EVALS = {"surrogate_select": 60, "surrogate_permute": 1000}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n: int
    k: int
    seed: int
    v: int | None = None
    p: float | None = None
    fd: float = 0.01
    sigma_h_sq: float = 1.0
    snr_db_list: tuple[float, ...] = tuple(float(s) for s in range(0, 21, 2))
    noiseless: bool = False
    frames: int | None = None
    max_evals: int | None = None
    workers: int = 1
    estimator: str = "mmse"
    uniform_pilots: bool = False
    check_node: str = "exact"
    selection: tuple[int, ...] | None = None  # 0-based
    permutation: tuple[int, ...] | None = None  # 0-based
    out: str = "results"

    @property
    def effective_frames(self) -> int:
        return self.frames if self.frames is not None else _DEFAULT_FRAMES[self.kind]

    @property
    def effective_max_evals(self) -> int:
        if self.max_evals is not None:
            return self.max_evals
        if self.kind == "brute_force":
            return math.comb(self.n, self.v)
        if self.kind == "fig1_table":
            return self.n
        return _DEFAULT_MAX_EVALS.get(self.kind, 1)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    items = [t for t in text.replace(" ", "").split(",") if t]
    return tuple(float(t) for t in items)


_PARSERS = {
    "kind": lambda t: t.strip().replace("-", "_"),
    "n": int, "k": int, "seed": int, "v": int, "frames": int, "max_evals": int, "workers": int,
    "p": float, "fd": float, "sigma_h_sq": float,
    "snr_db_list": _parse_floats,
    "noiseless": _parse_bool, "uniform_pilots": _parse_bool,
    "estimator": str.strip, "check_node": str.strip, "out": str.strip,
    "selection": lambda t: tuple(parse_positions(t)),
    "permutation": lambda t: tuple(parse_positions(t)),
}
KEYS = tuple(f.name for f in fields(ExperimentConfig))


def _format_value(name, value) -> str:
    if name in ("selection", "permutation"):
        return format_positions(value)
    if name == "snr_db_list":
        return ",".join(repr(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_pairs(pairs: dict[str, str]) -> dict:
    """Typed values for textual ``key -> value`` pairs; unknown keys are rejected."""
    out = {}
    for key, text in pairs.items():
        name = key.strip().replace("-", "_")
        if name not in _PARSERS:
            raise ConfigError(f"unknown configuration key: {key!r}")
        try:
            out[name] = _PARSERS[name](text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {name}: {text!r} ({exc})") from None
    return out


def read_config_text(text: str) -> dict[str, str]:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value.strip()
    return pairs


def build_config(values: dict) -> ExperimentConfig:
    """Validate typed values into an :class:`ExperimentConfig`."""
    unknown = set(values) - set(KEYS)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    missing = [key for key in ("kind", "n", "k", "seed") if values.get(key) is None]
    if missing:
        raise ConfigError(f"missing required fields: {missing}")
    kind = values["kind"]
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {KINDS}")
    missing = [key for key in _REQUIRED[kind] if values.get(key) is None]
    if missing:
        raise ConfigError(f"{kind} requires {missing}")
    cfg = ExperimentConfig(**values)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    N, K = cfg.n, cfg.k
    if N < 2 or N & (N - 1):
        raise ConfigError("n must be a power of two >= 2")
    if not 1 <= K <= N:
        raise ConfigError("k must satisfy 1 <= k <= n")
    if cfg.seed < 0:
        raise ConfigError("seed must be non-negative")
    if cfg.v is not None and not 1 <= cfg.v <= N:
        raise ConfigError(f"v must satisfy 1 <= v <= n, got v={cfg.v}, n={N}")
    if cfg.kind == "fig1_table" and cfg.v not in (None, 1):
        raise ConfigError("fig1_table is defined for v = 1")
    if cfg.p is not None and not 0.0 <= cfg.p <= 0.5:
        raise ConfigError("p must lie in [0, 0.5]")
    if cfg.fd < 0 or cfg.sigma_h_sq <= 0:
        raise ConfigError("need fd >= 0 and sigma_h_sq > 0")
    if not cfg.snr_db_list or not all(math.isfinite(s) for s in cfg.snr_db_list):
        raise ConfigError("snr_db_list must be a non-empty list of finite values")
    for name in ("frames", "max_evals", "workers"):
        value = getattr(cfg, name)
        if value is not None and value < 1:
            raise ConfigError(f"{name} must be >= 1")
    if cfg.estimator not in ESTIMATORS:
        raise ConfigError(f"estimator must be one of {ESTIMATORS}")
    if cfg.check_node not in CHECK_NODES:
        raise ConfigError(f"check_node must be one of {CHECK_NODES}")
    if cfg.selection is not None:
        if len(set(cfg.selection)) != len(cfg.selection) or max(cfg.selection, default=0) >= N:
            raise ConfigError("selection must hold distinct positions in 1..n")
        if cfg.v is not None and len(cfg.selection) > cfg.v:
            raise ConfigError("selection is longer than v")
    if cfg.permutation is not None and sorted(cfg.permutation) != list(range(N)):
        raise ConfigError("permutation must be a bijection on 1..n")


def serialize(cfg: ExperimentConfig) -> str:
    """``key = value`` text that :func:`parse_config_text` maps back to ``cfg``."""
    lines = []
    for name, value in asdict(cfg).items():
        if value is None:
            continue
        lines.append(f"{name} = {_format_value(name, value)}")
    return "\n".join(lines) + "\n"


def parse_config_text(text: str, overrides: dict | None = None) -> ExperimentConfig:
    values = parse_pairs(read_config_text(text))
    values.update(overrides or {})
    return build_config(values)


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    new = replace(cfg, **changes)
    validate(new)
    return new
