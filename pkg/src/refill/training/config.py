from collections.abc import Mapping
from dataclasses import asdict, dataclass, fields
import math
import os

from refill.environment.features import AdjacencyMode
from refill.errors import ConfigurationError

SEED_ENV_VAR = "REFILL_SEED"
DEFAULT_ROLLOUT_BUDGET = 2048


def default_seed() -> int:
    """Seed from ``REFILL_SEED``, or 0 when unset.

    Raises:
        ConfigurationError: If the variable is set but not an integer.
    """
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or not raw.strip():
        return 0
    try:
        return int(raw)
    except ValueError as e:
        msg = f"{SEED_ENV_VAR} must be an integer, got {raw!r}"
        raise ConfigurationError(msg) from e


@dataclass(frozen=True)
class TrainConfig:
    """PPO training configuration.

    ``rollout_length`` of ``None`` means ``max(1, round(2048 / parallel_envs))``
    steps per environment. A ``total_timesteps`` of 0 trains nothing.
    """

    total_timesteps: int = 500_000
    parallel_envs: int = 5
    learning_rate: float = 1e-4
    node_dim: int = 32
    policy_sizes: tuple[int, ...] = ()
    ent_coef: float = 0.0
    action_masking: bool = True
    clip_epsilon: float = 0.2
    gamma: float = 0.99
    gae_lambda: float = 0.95
    rollout_length: int | None = None
    epochs_per_update: int = 10
    minibatch_size: int = 64
    value_coef: float = 0.5
    max_grad_norm: float = 0.5
    seed: int = 0
    adjacency_mode: AdjacencyMode = "current"
    workers: int = 1

    def __post_init__(self) -> None:  # noqa: C901
        object.__setattr__(self, "policy_sizes", tuple(self.policy_sizes))
        problems: list[str] = []
        if self.total_timesteps < 0:
            problems.append(f"total_timesteps must be >= 0, got {self.total_timesteps}")
        if self.parallel_envs < 1:
            problems.append(f"parallel_envs must be >= 1, got {self.parallel_envs}")
        if self.learning_rate <= 0:
            problems.append(f"learning_rate must be positive, got {self.learning_rate}")
        if self.node_dim < 1 or any(size < 1 for size in self.policy_sizes):
            problems.append("node_dim and policy_sizes must be positive")
        if self.ent_coef < 0 or self.value_coef < 0:
            problems.append("ent_coef and value_coef must be nonnegative")
        if not 0.0 < self.clip_epsilon < 1.0:
            problems.append(f"clip_epsilon must lie in (0, 1), got {self.clip_epsilon}")
        if not (0.0 < self.gamma <= 1.0 and 0.0 <= self.gae_lambda <= 1.0):
            problems.append("gamma must lie in (0, 1] and gae_lambda in [0, 1]")
        if self.rollout_length is not None and self.rollout_length < 1:
            problems.append(f"rollout_length must be >= 1, got {self.rollout_length}")
        if self.epochs_per_update < 1 or self.minibatch_size < 1:
            problems.append("epochs_per_update and minibatch_size must be >= 1")
        if self.max_grad_norm <= 0:
            problems.append(f"max_grad_norm must be positive, got {self.max_grad_norm}")
        if self.adjacency_mode not in {"current", "original"}:
            problems.append(f"Unknown adjacency mode: {self.adjacency_mode!r}")
        if self.workers < 1:
            problems.append(f"workers must be >= 1, got {self.workers}")
        if (
            not problems
            and self.total_timesteps > 0
            and self.total_timesteps < self.batch_size
        ):
            problems.append(
                f"total_timesteps={self.total_timesteps} is below one rollout "
                f"({self.steps_per_env} steps x {self.parallel_envs} envs)"
            )
        if problems:
            raise ConfigurationError("; ".join(problems))

    @property
    def steps_per_env(self) -> int:
        if self.rollout_length is not None:
            return self.rollout_length
        return max(1, round(DEFAULT_ROLLOUT_BUDGET / self.parallel_envs))

    @property
    def batch_size(self) -> int:
        """Transitions gathered per update."""
        return self.steps_per_env * self.parallel_envs

    @property
    def num_updates(self) -> int:
        """Updates needed to consume ``total_timesteps``; the last may overshoot."""
        return math.ceil(self.total_timesteps / self.batch_size)

    def echo(self) -> dict[str, object]:
        """Configuration echo written into every training output."""
        echo = asdict(self)
        echo["policy_sizes"] = list(self.policy_sizes)
        echo["rollout_length"] = self.steps_per_env
        return echo


# Hyperparameter rows of the published experiments. Grid rows use an empty
# value MLP and masking; "ablation-*" rows are the non-masking runs.
PRESETS: dict[str, dict[str, object]] = {
    "grid5": {"learning_rate": 1e-4, "node_dim": 32},
    "grid6": {"learning_rate": 1e-4, "node_dim": 32},
    "grid7": {"learning_rate": 1e-4, "node_dim": 32},
    "grid8": {"learning_rate": 5e-5, "node_dim": 32},
    "grid9": {"learning_rate": 5e-5, "node_dim": 16},
    "grid10": {"learning_rate": 5e-5, "node_dim": 8},
    "pace2": {"learning_rate": 5e-5, "node_dim": 16},
    "pace3": {"learning_rate": 1e-4, "node_dim": 32},
    "pace11": {"learning_rate": 5e-5, "node_dim": 32},
    "pace13": {"learning_rate": 5e-5, "node_dim": 16},
    "pace18": {"learning_rate": 5e-5, "node_dim": 16},
    "pace23": {"learning_rate": 5e-5, "node_dim": 16},
    "pace26": {"learning_rate": 5e-5, "node_dim": 16},
    "pace40": {"learning_rate": 5e-5, "node_dim": 16},
    "pace92": {"learning_rate": 5e-5, "node_dim": 16},
    "pace99": {"learning_rate": 5e-5, "node_dim": 16},
    "pace100": {"learning_rate": 5e-5, "node_dim": 16},
    "gnp": {
        "parallel_envs": 35,
        "learning_rate": 1e-4,
        "node_dim": 16,
        "ent_coef": 0.01,
    },
    "ablation-grid8": {
        "policy_sizes": (16, 16),
        "learning_rate": 1e-4,
        "node_dim": 8,
        "ent_coef": 0.002,
        "action_masking": False,
    },
    "ablation-pace100": {
        "policy_sizes": (16, 16),
        "learning_rate": 1e-4,
        "parallel_envs": 10,
        "node_dim": 16,
        "ent_coef": 0.002,
        "action_masking": False,
    },
}


def train_config(
    preset: str | None = None, overrides: Mapping[str, object] | None = None
) -> TrainConfig:
    """Build a ``TrainConfig`` from an optional preset plus explicit overrides.

    Raises:
        ConfigurationError: On an unknown preset or field, or invalid values.
    """
    values: dict[str, object] = {}
    if preset is not None:
        if preset not in PRESETS:
            msg = f"Unknown preset {preset!r}; choose from {', '.join(sorted(PRESETS))}"
            raise ConfigurationError(msg)
        values.update(PRESETS[preset])
    values.update(overrides or {})
    known = {f.name for f in fields(TrainConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        msg = f"Unknown training options: {', '.join(unknown)}"
        raise ConfigurationError(msg)
    return TrainConfig(**values)  # type: ignore[arg-type]
