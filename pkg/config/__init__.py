from .config import (
    AdaptConfig,
    DEFAULT_THETA_GRID,
    DEFAULT_WEEKS,
    ExperimentConfig,
    GritNetConfig,
    RuntimeSettings,
    TrainConfig,
    config_hash,
    get_config,
    load_experiment_config,
    load_runtime_settings,
    load_toml,
    update_config,
)
