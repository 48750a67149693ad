from refill.training.config import (
    PRESETS,
    SEED_ENV_VAR,
    TrainConfig,
    default_seed,
    train_config,
)
from refill.training.log_writer import (
    LOG_COLUMNS,
    TrainingLogWriter,
    UpdateRecord,
    read_training_log,
)
from refill.training.ppo import (
    Trainer,
    TrainingOutputs,
    TrainLog,
    TrainResult,
    UpdateStats,
    env_graph_indices,
    ppo_update,
    train,
)
from refill.training.rollout import (
    CompletedEpisode,
    RolloutBuffer,
    collect_rollouts,
    compute_gae,
    evaluate_observations,
)

__all__ = [
    "LOG_COLUMNS",
    "PRESETS",
    "SEED_ENV_VAR",
    "CompletedEpisode",
    "RolloutBuffer",
    "TrainConfig",
    "TrainLog",
    "TrainResult",
    "Trainer",
    "TrainingLogWriter",
    "TrainingOutputs",
    "UpdateRecord",
    "UpdateStats",
    "collect_rollouts",
    "compute_gae",
    "default_seed",
    "env_graph_indices",
    "evaluate_observations",
    "ppo_update",
    "read_training_log",
    "train",
    "train_config",
]
