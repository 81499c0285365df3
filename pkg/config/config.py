"""
Configuration models for the GritNet outcome predictor.

Every configuration object is a pydantic model whose validators enforce the
invariants the rest of the code relies on. Runtime settings that vary per
machine (precision, worker count, the pooling default) come from the environment; experiment
settings come from TOML files, with command-line flags applied on top.
"""
import hashlib
import json
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator, model_validator

load_dotenv()

DEFAULT_THETA_GRID = [0.1, 0.2, 0.3, 0.4]
DEFAULT_WEEKS = [1, 2, 3, 4, 5, 6, 7, 8]


class RuntimeSettings(BaseModel):

    # Numeric precision for training; gradient checks force "double"
    precision: Literal["single", "double"] = "single"

    # Parallel jobs for folds / weeks / thresholds; 0 = all available cores
    workers: int = Field(default=0, ge=0)

    # Default for experiments that do not set pool_padding themselves
    pool_padding: bool = True


class GritNetConfig(BaseModel):
    """Architecture of one GritNet model."""
    vocab_size: int = Field(ge=1)
    delta_buckets: int = Field(ge=1)
    embedding_dim: int = Field(default=64, ge=1)
    hidden_dim: int = Field(default=32, ge=1)
    seed: int = 0
    # True: padded steps take part in max pooling (literal zero-vector padding)
    pool_padding: bool = True

    @property
    def num_events(self) -> int:
        """|O|: action tokens followed by delta tokens."""
        return self.vocab_size + self.delta_buckets

    @classmethod
    def full_scale(cls, vocab_size: int, delta_buckets: int, seed: int = 0) -> "GritNetConfig":
        return cls(vocab_size=vocab_size, delta_buckets=delta_buckets, embedding_dim=512, hidden_dim=256, seed=seed)


class TrainConfig(BaseModel):
    epochs: int = Field(default=20, ge=1)
    batch_size: int = Field(default=32, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    epsilon: float = Field(default=1e-8, gt=0)
    patience: int = Field(default=5, ge=1)
    seed: int = 0
    weeks: List[int] = Field(default_factory=lambda: list(DEFAULT_WEEKS))
    # Fraction of the training split held out for early stopping
    valid_fraction: float = Field(default=0.2, gt=0, lt=1)

    @field_validator("weeks")
    @classmethod
    def _weeks_valid(cls, weeks: List[int]) -> List[int]:
        if not weeks:
            raise ValueError("week list must not be empty")
        if any(w < 1 for w in weeks):
            raise ValueError("weeks start at 1")
        return sorted(set(weeks))


class AdaptConfig(BaseModel):
    thresholds: List[float] = Field(default_factory=lambda: list(DEFAULT_THETA_GRID))
    epochs: int = Field(default=5, ge=1)
    freeze_policy: Literal["all_but_fc"] = "all_but_fc"
    # Share of target students held out to select θ
    selection_fraction: float = Field(default=0.2, gt=0, lt=1)

    @field_validator("thresholds")
    @classmethod
    def _thresholds_valid(cls, thresholds: List[float]) -> List[float]:
        if not thresholds:
            raise ValueError("threshold grid must not be empty")
        for theta in thresholds:
            if not 0.0 < theta < 1.0:
                raise ValueError(f"threshold {theta} outside (0, 1)")
        return thresholds


class ExperimentConfig(BaseModel):
    """Everything one `experiment` (or individual command) run needs."""
    output_dir: Path = Path("runs/default")
    source: str = "nd_a_v1"
    targets: List[str] = Field(default_factory=lambda: ["nd_a_v2", "nd_b", "nd_c"])
    students: int = Field(default=1000, ge=1)
    folds: int = Field(default=5, ge=2)
    seeds: List[int] = Field(default_factory=lambda: [7])
    workers: Optional[int] = Field(default=None, ge=0)
    calibrate: bool = True
    # Students simulated per calibration probe
    probe_students: int = Field(default=1000, ge=10)
    # Shrinks course item counts and pacing together (1.0 = preset size)
    scale: float = Field(default=1.0, gt=0)
    embedding_dim: int = Field(default=64, ge=1)
    hidden_dim: int = Field(default=32, ge=1)
    delta_cap: int = Field(default=30, ge=1)
    pool_padding: bool = Field(default_factory=lambda: get_config().pool_padding)
    train: TrainConfig = Field(default_factory=TrainConfig)
    adapt: AdaptConfig = Field(default_factory=AdaptConfig)
    baseline_l2: float = Field(default=1e-2, ge=0)
    baseline_epochs: int = Field(default=300, ge=1)
    baseline_lr: float = Field(default=0.1, gt=0)

    @model_validator(mode="after")
    def _seeds_present(self) -> "ExperimentConfig":
        if not self.seeds:
            raise ValueError("at least one seed is required")
        return self

    @property
    def weeks(self) -> List[int]:
        return self.train.weeks

    def config_hash(self) -> str:
        return config_hash(self)


def config_hash(model: BaseModel) -> str:
    """sha256 of the canonical JSON form of a configuration."""
    canonical = json.dumps(model.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_toml(path: Path) -> Dict[str, Any]:
    with open(path, "rb") as f:
        return tomllib.load(f)


def _deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_experiment_config(path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Build an ExperimentConfig from an optional TOML file and flag overrides.

    Flags win over file values; None-valued overrides are ignored so unset
    flags never clobber the file.
    """
    data: Dict[str, Any] = load_toml(path) if path is not None else {}
    if overrides:
        data = _deep_merge(data, overrides)
    return ExperimentConfig(**data)


# Global runtime settings, built from the environment on first use
_settings: Optional[RuntimeSettings] = None


def load_runtime_settings() -> RuntimeSettings:
    """
    Read the GRITNET_* runtime variables.

    Raises:
        ValidationError: If a variable holds an invalid value
    """
    return RuntimeSettings(
        precision=os.getenv("GRITNET_PRECISION", "single"),
        workers=os.getenv("GRITNET_WORKERS", "0"),
        pool_padding=os.getenv("GRITNET_POOL_PADDING", "true"),
    )


def get_config() -> RuntimeSettings:
    """Returns the global runtime settings."""
    global _settings
    if _settings is None:
        _settings = load_runtime_settings()
    return _settings


def update_config(config_updates: Dict[str, Any]) -> None:
    """Updates the global runtime settings with the provided values."""
    settings = get_config()
    for key, value in config_updates.items():
        if hasattr(settings, key):
            setattr(settings, key, value)
