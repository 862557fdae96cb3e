"""Experiment configuration: JSON with a versioned schema field."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ..quadrature import QuadratureSpec

SCHEMA = "reclab.config/1"

CHECK_NAMES = ("dpi", "thm1", "thm2", "lemma_mon", "limit", "hirsch", "examples", "regularize")

# per-check trial caps: the effective count is min(trials, cap)
TRIAL_CAPS = {
    "dpi": 500,
    "thm1": 300,
    "thm2": 300,
    "lemma_mon": 200,
    "limit": 50,
    "hirsch": 50,
    "examples": 100,
    "regularize": 50,
}

DEFAULT_DIMS = ((2, 2, 2), (3, 2, 2), (2, 3, 2), (3, 3, 2), (4, 2, 2), (2, 4, 1), (4, 4, 2), (3, 3, 1))

DEFAULT_TOLERANCES = {
    "slack_tol": 1e-6,
    "dpi_tol": 1e-9,
    "psd_tol": 1e-9,
    "cert_tol": 1e-10,
    "norm_tol": 1e-9,
    "choi_tol": 1e-8,
    "regularize_gap": 1e-3,
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field or line."""


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 20240611
    dims: tuple[tuple[int, int, int], ...] = DEFAULT_DIMS
    trials: int = 500
    q_list: tuple[float, ...] = (1.0, 1.5, 2.0)
    s_list: tuple[float, ...] = (0.6, 0.75, 0.9)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    checks: dict = field(default_factory=lambda: {name: True for name in CHECK_NAMES})
    singular_rate: float = 0.1
    fixture: str | None = None

    def __post_init__(self):
        validate(self)

    def enabled(self) -> list[str]:
        return [name for name in CHECK_NAMES if self.checks.get(name, False)]

    def trial_count(self, check: str) -> int:
        return min(self.trials, TRIAL_CAPS[check])

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def with_checks(self, names) -> "ExperimentConfig":
        names = set(names)
        return replace(self, checks={name: name in names for name in CHECK_NAMES})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dims"] = [list(x) for x in self.dims]
        d["q_list"] = list(self.q_list)
        d["s_list"] = list(self.s_list)
        return {"schema": SCHEMA, **d}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def validate(cfg: ExperimentConfig) -> None:
    if not 0 <= int(cfg.seed) < 2**64:
        raise ConfigError("field 'seed': must be an unsigned 64-bit integer")
    if cfg.trials < 1:
        raise ConfigError("field 'trials': must be at least 1")
    if not cfg.dims:
        raise ConfigError("field 'dims': at least one (n, m, d) triple required")
    for k, dim in enumerate(cfg.dims):
        if len(dim) != 3 or min(dim) < 1:
            raise ConfigError(f"field 'dims[{k}]': expected three positive integers, got {dim}")
        n, m, d = dim
        if m * d < n:
            raise ConfigError(f"field 'dims[{k}]': need m*d >= n, got {dim}")
    for q in cfg.q_list:
        if not 1.0 <= q <= 2.0:
            raise ConfigError(f"field 'q_list': {q} outside [1, 2]")
    for s in cfg.s_list:
        if not 0.5 < s < 1.0:
            raise ConfigError(f"field 's_list': {s} outside (1/2, 1)")
    for name, value in cfg.tolerances.items():
        if name not in DEFAULT_TOLERANCES:
            raise ConfigError(f"field 'tolerances.{name}': unknown tolerance")
        if not float(value) > 0:
            raise ConfigError(f"field 'tolerances.{name}': must be positive")
    for name in cfg.checks:
        if name not in CHECK_NAMES:
            raise ConfigError(f"field 'checks.{name}': unknown check")
    if not 0.0 <= cfg.singular_rate <= 1.0:
        raise ConfigError("field 'singular_rate': must lie in [0, 1]")
    if cfg.fixture not in (None, "identity"):
        raise ConfigError(f"field 'fixture': unknown fixture {cfg.fixture!r}")


def from_dict(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("top level: expected a JSON object")
    schema = d.get("schema")
    if schema != SCHEMA:
        raise ConfigError(f"field 'schema': expected {SCHEMA!r}, got {schema!r}")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(d) - known - {"schema"})
    if unknown:
        raise ConfigError(f"field {unknown[0]!r}: unknown field")
    kwargs = {k: v for k, v in d.items() if k in known}
    try:
        if "dims" in kwargs:
            kwargs["dims"] = tuple(tuple(int(x) for x in dim) for dim in kwargs["dims"])
        for key in ("q_list", "s_list"):
            if key in kwargs:
                kwargs[key] = tuple(float(x) for x in kwargs[key])
        if "quadrature" in kwargs:
            kwargs["quadrature"] = QuadratureSpec(**kwargs["quadrature"])
        if "tolerances" in kwargs:
            kwargs["tolerances"] = {**DEFAULT_TOLERANCES, **kwargs["tolerances"]}
        if "checks" in kwargs:
            kwargs["checks"] = {name: bool(kwargs["checks"].get(name, False)) for name in CHECK_NAMES} | {
                k: v for k, v in kwargs["checks"].items() if k not in CHECK_NAMES
            }
        for key in ("seed", "trials"):
            if key in kwargs:
                kwargs[key] = int(kwargs[key])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid value: {exc}") from exc
    return ExperimentConfig(**kwargs)


def loads(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return from_dict(data)


def load(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        return loads(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
