import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union, get_args, get_origin

from .activation import ActivationKind, hidden_catalog, parse_catalog
from .errors import ConfigError


def _csv_env(name: str, default: str = "") -> List[str]:
    raw = os.getenv(name, default)
    return [item.strip() for item in raw.split(",") if item.strip()]


@dataclass
class Settings:
    """Process-level settings; only the output directory affects experiments."""

    out_dir: str = os.getenv("HANEAT_OUT_DIR", "results")
    data_dir: str = os.getenv("HANEAT_DATA_DIR", "data")
    mcp_api_keys: List[str] = field(default_factory=lambda: _csv_env("HANEAT_MCP_API_KEYS"))
    allowed_origins: List[str] = field(default_factory=lambda: _csv_env("HANEAT_ALLOWED_ORIGINS", "*"))
    host: str = os.getenv("HANEAT_HOST", "127.0.0.1")
    port: int = int(os.getenv("HANEAT_PORT", "8000"))


settings = Settings()


@dataclass(frozen=True)
class Coefficients:
    """Weights of the compatibility distance terms."""

    c_excess: float = 1.0
    c_disjoint: float = 1.0
    c_weight: float = 0.2


_RATE_FIELDS = (
    "crossover_fraction",
    "p_add_node",
    "p_add_connection",
    "p_mutate_activation",
    "p_mutate_weight",
    "p_enable",
    "p_disable",
    "disabled_inherit_rate",
)


@dataclass(frozen=True)
class EvolutionConfig:
    """Hyperparameters of one evolution run. Defaults are the reference HA-NEAT settings."""

    population_size: int = 100
    max_generations: int = 3000
    crossover_fraction: float = 0.90
    p_add_node: float = 0.01
    p_add_connection: float = 0.30
    p_mutate_activation: float = 0.20
    p_mutate_weight: float = 0.20
    delta_weight: float = 2.0
    p_enable: float = 0.0002
    p_disable: float = 0.002
    # speciation
    target_species: int = 10
    compatibility_threshold: float = 20.0
    c_excess: float = 1.0
    c_disjoint: float = 1.0
    c_weight: float = 0.2
    dropoff_age: int = 15
    threshold_step: float = 0.5
    threshold_floor: float = 0.5
    # reproduction
    elitism_min_species_size: int = 5
    tournament_size: int = 2
    add_connection_attempts: int = 20
    initial_weight_range: float = 2.0
    disabled_inherit_rate: float = 0.75
    catalog: Tuple[ActivationKind, ...] = tuple(hidden_catalog())
    classification_fitness: str = "label"
    eval_workers: int = 1
    debug_checks: bool = False
    seed: int = 0

    @property
    def coefficients(self) -> Coefficients:
        return Coefficients(self.c_excess, self.c_disjoint, self.c_weight)

    def validate(self) -> "EvolutionConfig":
        for name in _RATE_FIELDS:
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name}={value} is not a rate in [0, 1].")
        if self.population_size < 2:
            raise ConfigError(f"population_size={self.population_size} must be at least 2.")
        if self.max_generations < 0:
            raise ConfigError("max_generations must be non-negative.")
        if self.delta_weight < 0 or self.initial_weight_range < 0:
            raise ConfigError("delta_weight and initial_weight_range must be non-negative.")
        if self.threshold_step <= 0 or self.threshold_floor <= 0 or self.compatibility_threshold <= 0:
            raise ConfigError("Compatibility threshold, its step and its floor must be positive.")
        if self.tournament_size < 1 or self.add_connection_attempts < 1:
            raise ConfigError("tournament_size and add_connection_attempts must be at least 1.")
        if self.classification_fitness not in ("label", "raw"):
            raise ConfigError(f"classification_fitness must be 'label' or 'raw', got '{self.classification_fitness}'.")
        if self.eval_workers < 1:
            raise ConfigError("eval_workers must be at least 1.")
        parse_catalog(self.catalog)
        return self

    def with_overrides(self, **overrides: Any) -> "EvolutionConfig":
        coerced = {name: coerce_field(EvolutionConfig, name, value) for name, value in overrides.items()}
        return replace(self, **coerced).validate()


def field_names(cls) -> List[str]:
    return [f.name for f in fields(cls)]


def coerce_field(cls, name: str, value: Any) -> Any:
    """Convert a raw (JSON/CLI) value into the declared type of ``cls.name``."""
    declared = {f.name: f.type for f in fields(cls)}
    if name not in declared:
        raise ConfigError(f"Unknown config key '{name}' for {cls.__name__}.")
    kind = declared[name]
    if value is None:
        return None
    optional = [arg for arg in get_args(kind) if arg is not type(None)]
    if get_origin(kind) is Union and len(optional) == 1:
        kind = optional[0]
        if kind is str and not isinstance(value, str):
            raise ConfigError(f"Config key '{name}' expects a string, got {value!r}.")
    if name == "catalog":
        items = value.split(",") if isinstance(value, str) else value
        return parse_catalog(items)
    try:
        if kind is bool:
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
        if kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if kind is float:
            return float(value)
        if kind is str:
            return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"Config key '{name}' expects {kind.__name__}, got {value!r}.") from None
    return value


def load_config_file(path: str | Path) -> Tuple[Dict[str, Any], Dict[str, Any]]:
    """Read a flat JSON document and split it into (evolution, experiment) overrides.

    Keys must be field names of ``EvolutionConfig`` or ``ExperimentSpec``.
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"Config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Config file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"Config file {path} must hold a flat key/value object.")
    return split_overrides(raw, str(path))


def split_overrides(raw: Dict[str, Any], source: str = "config") -> Tuple[Dict[str, Any], Dict[str, Any]]:
    """Route flat keys to (EvolutionConfig, ExperimentSpec) overrides; unknown keys are errors."""
    from .experiment import ExperimentSpec

    evolution_keys = set(field_names(EvolutionConfig))
    spec_keys = set(field_names(ExperimentSpec)) - {"evolution"}
    evolution: Dict[str, Any] = {}
    experiment: Dict[str, Any] = {}
    for key, value in raw.items():
        if isinstance(value, (dict, list)) and key != "catalog":
            raise ConfigError(f"Config key '{key}' must hold a scalar value.")
        if key in spec_keys:
            experiment[key] = coerce_field(ExperimentSpec, key, value)
        elif key in evolution_keys:
            evolution[key] = coerce_field(EvolutionConfig, key, value)
        else:
            raise ConfigError(f"Unknown config key '{key}' in {source}.")
    return evolution, experiment
