from refill.environment.features import (
    FEATURE_DIM,
    AdjacencyMode,
    Observation,
    build_observation,
    node_features,
)
from refill.environment.fill_env import (
    EnvConfig,
    EpisodeRecord,
    FillInEnv,
    StepResult,
)
from refill.environment.vector_env import VectorEnv, vector_env

__all__ = [
    "FEATURE_DIM",
    "AdjacencyMode",
    "EnvConfig",
    "EpisodeRecord",
    "FillInEnv",
    "Observation",
    "StepResult",
    "VectorEnv",
    "build_observation",
    "node_features",
    "vector_env",
]
