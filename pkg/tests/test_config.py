from pathlib import Path

import pytest
from pydantic import ValidationError

import config.config as config_module
from config.config import (
    AdaptConfig,
    ExperimentConfig,
    GritNetConfig,
    RuntimeSettings,
    TrainConfig,
    get_config,
    load_experiment_config,
    load_runtime_settings,
    update_config,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_defaults():
    config = ExperimentConfig()
    assert config.folds == 5
    assert config.adapt.thresholds == [0.1, 0.2, 0.3, 0.4]
    assert config.weeks == [1, 2, 3, 4, 5, 6, 7, 8]
    assert GritNetConfig(vocab_size=9, delta_buckets=6).num_events == 15


def test_shipped_configs_load():
    quick = load_experiment_config(CONFIGS / "quick.toml")
    assert quick.targets == ["nd_b"]
    assert quick.weeks == [1, 2, 3, 4]
    assert quick.train.batch_size == 32
    assert load_experiment_config(CONFIGS / "experiment.toml").seeds == [7, 8, 9]


def test_overrides_win_and_none_is_ignored():
    config = load_experiment_config(
        CONFIGS / "quick.toml",
        {"folds": 4, "students": None, "train": {"epochs": 1, "weeks": None}},
    )
    assert config.folds == 4
    assert config.students == 200
    assert config.train.epochs == 1
    assert config.train.weeks == [1, 2, 3, 4]
    assert config.train.batch_size == 32


def test_validation_errors():
    with pytest.raises(ValidationError):
        AdaptConfig(thresholds=[0.0, 0.5])
    with pytest.raises(ValidationError):
        AdaptConfig(thresholds=[])
    with pytest.raises(ValidationError):
        TrainConfig(weeks=[0, 1])
    with pytest.raises(ValidationError):
        TrainConfig(epochs=0)
    with pytest.raises(ValidationError):
        ExperimentConfig(seeds=[])
    with pytest.raises(ValidationError):
        ExperimentConfig(folds=1)


def test_weeks_are_sorted_and_unique():
    assert TrainConfig(weeks=[3, 1, 3, 2]).weeks == [1, 2, 3]


def test_config_hash_tracks_content():
    a, b = ExperimentConfig(), ExperimentConfig()
    assert a.config_hash() == b.config_hash()
    assert len(a.config_hash()) == 64
    assert ExperimentConfig(folds=3).config_hash() != a.config_hash()


def test_update_runtime_settings():
    settings = get_config()
    previous = settings.workers
    update_config({"workers": 3, "unknown_key": 1})
    try:
        assert get_config().workers == 3
        assert not hasattr(get_config(), "unknown_key")
    finally:
        update_config({"workers": previous})


def test_full_scale_model_dimensions():
    config = GritNetConfig.full_scale(vocab_size=20, delta_buckets=31, seed=4)
    assert (config.embedding_dim, config.hidden_dim) == (512, 256)
    assert config.num_events == 51
    assert config.seed == 4


def test_runtime_settings_come_from_the_environment(monkeypatch):
    monkeypatch.setenv("GRITNET_PRECISION", "double")
    monkeypatch.setenv("GRITNET_WORKERS", "2")
    monkeypatch.setenv("GRITNET_POOL_PADDING", "false")
    settings = load_runtime_settings()
    assert (settings.precision, settings.workers, settings.pool_padding) == ("double", 2, False)

    monkeypatch.setenv("GRITNET_PRECISION", "quad")
    with pytest.raises(ValidationError):
        load_runtime_settings()


def test_experiments_take_the_runtime_pooling_default(monkeypatch):
    monkeypatch.setattr(config_module, "_settings", RuntimeSettings(pool_padding=False))
    assert ExperimentConfig().pool_padding is False
    assert ExperimentConfig(pool_padding=True).pool_padding is True
    assert load_experiment_config(CONFIGS / "experiment.toml").pool_padding is True
