"""Engine configuration: reward weights, provider, and behavior flags.

Defaults reproduce the published constants (term weights 1 / 0.1 / 0.5 / 1,
dimension weights 0.3 / 0.2 / 0.5); unknown config keys are rejected so that
typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError
from .rewards import RewardWeights

PB_VARIANTS = ("canonical", "raw")


@dataclass(frozen=True)
class EngineConfig:
    weights: RewardWeights = field(default_factory=RewardWeights)
    provider: str = "fallback"
    use_ties: bool = True
    pb_variant: str = "canonical"
    clamp_weights: bool = False

    def __post_init__(self):
        if self.pb_variant not in PB_VARIANTS:
            raise ConfigError(
                f"pb_variant must be one of {PB_VARIANTS}, got {self.pb_variant!r}"
            )

    def to_json(self) -> dict:
        return {
            "weights": self.weights.to_json(),
            "provider": self.provider,
            "use_ties": self.use_ties,
            "pb_variant": self.pb_variant,
            "clamp_weights": self.clamp_weights,
        }


def _weights_from_json(obj: Mapping) -> RewardWeights:
    known = {"lambda_acc", "lambda_fmt", "lambda_cst", "lambda_prc", "dim_weights"}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"unknown weight keys: {sorted(unknown)}")
    kwargs: dict[str, Any] = {}
    for key in ("lambda_acc", "lambda_fmt", "lambda_cst", "lambda_prc"):
        if key in obj:
            kwargs[key] = float(obj[key])
    if "dim_weights" in obj:
        dims = obj["dim_weights"]
        if not isinstance(dims, (list, tuple)) or len(dims) != 3:
            raise ConfigError("dim_weights must be a list of three numbers")
        kwargs["dim_weights"] = tuple(float(x) for x in dims)
    try:
        return RewardWeights(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_from_json(obj: Mapping) -> EngineConfig:
    known = {"weights", "provider", "use_ties", "pb_variant", "clamp_weights"}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs: dict[str, Any] = {}
    if "weights" in obj:
        if not isinstance(obj["weights"], Mapping):
            raise ConfigError("weights must be an object")
        kwargs["weights"] = _weights_from_json(obj["weights"])
    if "provider" in obj:
        kwargs["provider"] = str(obj["provider"])
    for flag in ("use_ties", "clamp_weights"):
        if flag in obj:
            if not isinstance(obj[flag], bool):
                raise ConfigError(f"{flag} must be a boolean")
            kwargs[flag] = obj[flag]
    if "pb_variant" in obj:
        kwargs["pb_variant"] = str(obj["pb_variant"])
    return EngineConfig(**kwargs)


def load_config(path: str | Path) -> EngineConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"config {path} must contain a JSON object")
    return config_from_json(obj)


def apply_overrides(config: EngineConfig, **overrides: Any) -> EngineConfig:
    """Apply CLI-level overrides (None values are ignored)."""
    weight_fields = {}
    for name in ("lambda_acc", "lambda_fmt", "lambda_cst", "lambda_prc", "dim_weights"):
        value = overrides.pop(name, None)
        if value is not None:
            weight_fields[name] = value
    updates = {k: v for k, v in overrides.items() if v is not None}
    if weight_fields:
        try:
            updates["weights"] = replace(config.weights, **weight_fields)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return replace(config, **updates) if updates else config
