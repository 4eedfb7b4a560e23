"""Pipeline hyperparameters, config-file parsing, and precedence resolution.

Precedence: built-in defaults < config file (flat ``key = value`` lines,
``#`` comments) < explicit overrides (CLI flags).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import ConfigError

DENSE_CUTOFF = 20000  # n+m above this auto-selects push propagation

DECODE_MODES = ("sinkhorn", "raw")
PROPAGATION_MODES = ("auto", "dense", "push")


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of one pipeline run."""

    alpha: float = 0.7  # walk stop probability
    beta: float = 0.5  # intra/inter propagation balance
    k: int = 2  # cross-graph candidates kept per row
    delta: float = 1e-4  # sparsification threshold
    d: int = 128  # embedding rank
    epsilon: float = 1e-5  # token match score added each refinement round
    l1: int = 8  # propagation iterations
    l2: int = 8  # refinement iterations
    q: int = 10  # sinkhorn iterations
    hops: int = 2  # built-in encoder propagation rounds
    rng_seed: int = 0
    decode: str = "sinkhorn"
    propagation: str = "auto"
    no_refine: bool = False
    no_initial: bool = False
    no_propagation: bool = False

    def validate(self) -> "PipelineConfig":
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha={self.alpha!r} must be in (0, 1]")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta={self.beta!r} must be in [0, 1]")
        if self.k < 1:
            raise ConfigError(f"k={self.k!r} must be >= 1")
        if self.delta <= 0:
            raise ConfigError(f"delta={self.delta!r} must be positive")
        if self.d < 1:
            raise ConfigError(f"d={self.d!r} must be >= 1")
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon={self.epsilon!r} must be positive")
        for name in ("l1", "l2", "q", "hops"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name}={getattr(self, name)!r} must be >= 0")
        if self.decode not in DECODE_MODES:
            raise ConfigError(f"decode={self.decode!r} must be one of {DECODE_MODES}")
        if self.propagation not in PROPAGATION_MODES:
            raise ConfigError(
                f"propagation={self.propagation!r} must be one of {PROPAGATION_MODES}"
            )
        if self.no_initial and self.no_propagation:
            raise ConfigError(
                "no_initial and no_propagation together leave nothing to align"
            )
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def to_file_text(self) -> str:
        """Flat key = value text, reusable as a --config file."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    raw = raw.strip()
    if kind == "bool":
        lowered = raw.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ConfigError(f"{name}={raw!r} is not a boolean")
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{name}={raw!r} is not a {kind}") from None
    return raw


def parse_config_file(path) -> dict:
    """Parse flat ``key = value`` lines into typed config overrides."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path.name}:{lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path.name}:{lineno}: unknown config key {key!r}")
        overrides[key] = _coerce(key, raw)
    return overrides


def resolve_config(file_overrides=None, flag_overrides=None) -> PipelineConfig:
    """Apply precedence defaults < file < flags and validate the result."""
    merged = {}
    merged.update(file_overrides or {})
    merged.update({k: v for k, v in (flag_overrides or {}).items() if v is not None})
    unknown = set(merged) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return PipelineConfig(**merged).validate()
