"""Masked PPO training of the GCN elimination policy."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from refill.elimination.cost import fill_in_cost
from refill.elimination.state import Ordering
from refill.environment.fill_env import EnvConfig
from refill.environment.vector_env import VectorEnv
from refill.errors import ConfigurationError, ContractViolationError, NonFiniteLossError
from refill.graph_io.generators import make_rng
from refill.graph_io.ordering_file import OrderingWriter
from refill.logging import get_logger
from refill.policy.checkpoint import save_checkpoint
from refill.policy.gcn import (
    GraphBatch,
    LossSpec,
    PolicyParams,
    PPOBatch,
    SampleGroup,
    backward,
)
from refill.policy.optimizer import Adam, clip_grad_norm, global_norm
from refill.training.log_writer import TrainingLogWriter, UpdateRecord
from refill.training.rollout import RolloutBuffer, collect_rollouts, compute_gae

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from refill.elimination.graph import Graph
    from refill.training.config import TrainConfig

logger = get_logger("refill.training")

ADVANTAGE_EPS = 1e-8


@dataclass(frozen=True)
class UpdateStats:
    policy_loss: float
    value_loss: float
    entropy: float
    approx_kl: float
    clip_fraction: float
    grad_norm: float


def _minibatch(
    observations: Sequence, indices: "NDArray[np.int64]", columns: dict[str, "NDArray"]
) -> PPOBatch:
    by_size: dict[int, list[int]] = {}
    for index in indices:
        by_size.setdefault(observations[index].n, []).append(int(index))
    groups = []
    for size in sorted(by_size):
        rows = np.asarray(by_size[size], dtype=np.int64)
        groups.append(
            SampleGroup(
                graphs=GraphBatch.stack([observations[i] for i in rows]),
                actions=columns["actions"][rows],
                old_log_probs=columns["log_probs"][rows],
                advantages=columns["advantages"][rows],
                returns=columns["returns"][rows],
            )
        )
    return PPOBatch(tuple(groups))


def ppo_update(  # noqa: PLR0913, PLR0917
    params: PolicyParams,
    optimizer: Adam,
    buffer: RolloutBuffer,
    advantages: "NDArray[np.float64]",
    returns: "NDArray[np.float64]",
    cfg: "TrainConfig",
    rng: np.random.Generator,
) -> UpdateStats:
    """Run ``epochs_per_update`` passes of shuffled minibatch PPO steps.

    Advantages are normalized over the whole buffer before minibatching.

    Raises:
        NonFiniteLossError: If a loss or gradient becomes non-finite.
    """
    spec = LossSpec(cfg.clip_epsilon, cfg.value_coef, cfg.ent_coef)
    observations = buffer.flat_observations()
    flat_adv = advantages.ravel()
    columns = {
        "actions": buffer.actions.ravel(),
        "log_probs": buffer.log_probs.ravel(),
        "advantages": (flat_adv - flat_adv.mean()) / (flat_adv.std() + ADVANTAGE_EPS),
        "returns": returns.ravel(),
    }

    totals = np.zeros(5)
    weight = 0
    grad_norm = 0.0
    for epoch in range(cfg.epochs_per_update):
        order = rng.permutation(buffer.size)
        for start in range(0, buffer.size, cfg.minibatch_size):
            batch = _minibatch(observations, order[start : start + cfg.minibatch_size], columns)
            terms, grads = backward(params, batch, spec)
            grad_norm = global_norm(grads)
            if not (np.isfinite(terms.total) and np.isfinite(grad_norm)):
                diagnostics = {"epoch": epoch, "minibatch_start": start} | terms.as_dict()
                diagnostics["grad_norm"] = grad_norm
                msg = f"Non-finite PPO loss at epoch {epoch}, minibatch {start}"
                logger.error(f"{msg}: {diagnostics}")
                raise NonFiniteLossError(msg, diagnostics)
            clip_grad_norm(grads, cfg.max_grad_norm)
            optimizer.step(grads)
            totals += batch.size * np.array([
                terms.policy_loss,
                terms.value_loss,
                terms.entropy,
                terms.approx_kl,
                terms.clip_fraction,
            ])
            weight += batch.size

    means = totals / max(weight, 1)
    return UpdateStats(*(float(x) for x in means), grad_norm=grad_norm)


@dataclass
class TrainLog:
    records: list[UpdateRecord] = field(default_factory=list)

    @property
    def best_fill(self) -> int | None:
        return self.records[-1].best_fill if self.records else None


@dataclass(frozen=True)
class TrainingOutputs:
    """Files written by a training run, derived from one ``--output_file`` stem."""

    checkpoint: Path
    log: Path
    ordering_stem: Path

    @classmethod
    def from_output_file(cls, output_file: Path | str) -> "TrainingOutputs":
        stem = Path(output_file)
        return cls(
            checkpoint=stem.with_name(stem.name + ".policy.json"),
            log=stem.with_name(stem.name + ".log.csv"),
            ordering_stem=stem,
        )

    def ordering_path(self, graph_index: int, graph_count: int) -> Path:
        suffix = ".order" if graph_count == 1 else f".{graph_index}.order"
        return self.ordering_stem.with_name(self.ordering_stem.name + suffix)


@dataclass
class TrainResult:
    params: PolicyParams
    log: TrainLog
    best_orderings: dict[int, Ordering]


def env_graph_indices(graph_count: int, parallel_envs: int) -> list[list[int]]:
    """Graph indices owned by each env: env ``i`` gets ``i, i + k, i + 2k, ...``.

    With more envs than graphs, env ``i`` gets graph ``i mod graph_count``.
    """
    if parallel_envs >= graph_count:
        return [[i % graph_count] for i in range(parallel_envs)]
    return [list(range(i, graph_count, parallel_envs)) for i in range(parallel_envs)]


class Trainer:
    """Runs collect / advantage / update cycles and keeps the run's bookkeeping.

    After every update the checkpoint and the CSV log are rewritten; the best
    ordering of a graph is flushed as soon as it improves.
    """

    def __init__(  # type: ignore[reportMissingSuperCall]
        self,
        cfg: "TrainConfig",
        graphs: Sequence["Graph"],
        outputs: TrainingOutputs | None = None,
        labels: Sequence[Sequence[str] | None] | None = None,
    ) -> None:
        if not graphs:
            msg = "Training needs at least one graph"
            raise ConfigurationError(msg)
        self._cfg = cfg
        self._graphs = list(graphs)
        self._outputs = outputs
        self._labels = list(labels) if labels is not None else [None] * len(graphs)
        self.last_error_msg: str | None = None

        init_seed, sample_seed, shuffle_seed = (
            int(child.generate_state(1)[0])
            for child in np.random.SeedSequence(cfg.seed).spawn(3)
        )
        self._params = PolicyParams.initialize(cfg.node_dim, cfg.policy_sizes, init_seed)
        self._optimizer = Adam(self._params, cfg.learning_rate)
        self._sample_rng = make_rng(sample_seed)
        self._shuffle_rng = make_rng(shuffle_seed)

        self._env_graphs = env_graph_indices(len(graphs), cfg.parallel_envs)
        self._venv = VectorEnv(
            [
                EnvConfig(
                    graphs=tuple(self._graphs[g] for g in owned),
                    masking_enabled=cfg.action_masking,
                    seed=cfg.seed + i,
                    adjacency_mode=cfg.adjacency_mode,
                )
                for i, owned in enumerate(self._env_graphs)
            ],
            max_workers=cfg.workers,
        )
        self._log = TrainLog()
        self._best: dict[int, Ordering] = {}
        self._best_fill: int | None = None
        self._timesteps = 0
        self._writer = TrainingLogWriter(outputs.log) if outputs is not None else None

    @property
    def params(self) -> PolicyParams:
        return self._params

    @property
    def timesteps(self) -> int:
        return self._timesteps

    def _echo(self) -> dict[str, object]:
        return self._cfg.echo() | {"graph_count": len(self._graphs)}

    def _save(self) -> None:
        if self._outputs is None:
            return
        save_checkpoint(self._outputs.checkpoint, self._params, self._echo())

    def _record_episodes(self, buffer: RolloutBuffer) -> float | None:
        fills: list[int] = []
        for episode in buffer.episodes:
            record = episode.record
            graph_index = self._env_graphs[episode.env_index][record.graph_index]
            fills.append(record.fill)
            current = self._best.get(graph_index)
            if current is not None and record.fill >= current.fill_cost:
                continue
            rescored = fill_in_cost(self._graphs[graph_index], record.ordering.pi)
            if rescored != record.fill:
                msg = (
                    f"Episode on graph {graph_index} reported fill {record.fill}, "
                    f"re-scored {rescored}"
                )
                logger.error(msg)
                self.last_error_msg = msg
                raise ContractViolationError(msg)
            self._best[graph_index] = record.ordering
            self._flush_ordering(graph_index)
        if fills:
            low = min(fills)
            self._best_fill = low if self._best_fill is None else min(self._best_fill, low)
            return float(np.mean(fills))
        return None

    def _flush_ordering(self, graph_index: int) -> None:
        if self._outputs is None:
            return
        ordering = self._best[graph_index]
        path = self._outputs.ordering_path(graph_index, len(self._graphs))
        header = {"graph": graph_index, "timesteps": self._timesteps, "seed": self._cfg.seed}
        OrderingWriter(path).write(
            self._graphs[graph_index], ordering, self._labels[graph_index], header
        )
        logger.debug(f"New best fill {ordering.fill_cost} on graph {graph_index}")

    def update(self) -> UpdateRecord:
        """One collect / compute / update cycle."""
        cfg = self._cfg
        buffer = collect_rollouts(self._params, self._venv, cfg.steps_per_env, self._sample_rng)
        self._timesteps += buffer.size
        mean_fill = self._record_episodes(buffer)
        advantages, returns = compute_gae(buffer, cfg.gamma, cfg.gae_lambda)
        stats = ppo_update(
            self._params, self._optimizer, buffer, advantages, returns, cfg, self._shuffle_rng
        )
        record = UpdateRecord(
            timesteps=self._timesteps,
            mean_fill=mean_fill,
            best_fill=self._best_fill,
            policy_loss=stats.policy_loss,
            value_loss=stats.value_loss,
            entropy=stats.entropy,
            approx_kl=stats.approx_kl,
            clip_fraction=stats.clip_fraction,
        )
        self._log.records.append(record)
        if self._writer is not None:
            self._writer.append(record)
        self._save()
        logger.info(
            f"timesteps={record.timesteps} mean_fill={record.mean_fill} "
            f"best_fill={record.best_fill} approx_kl={stats.approx_kl:.5f} "
            f"clip_fraction={stats.clip_fraction:.3f}"
        )
        return record

    def run(self) -> TrainResult:
        cfg = self._cfg
        logger.info(
            f"Training on {len(self._graphs)} graph(s): {cfg.num_updates} updates of "
            f"{cfg.batch_size} steps ({cfg.parallel_envs} envs)"
        )
        if self._writer is not None:
            self._writer.start(self._echo())
        self._save()
        self._venv.reset()
        for _ in range(cfg.num_updates):
            self.update()
        return TrainResult(self._params, self._log, dict(sorted(self._best.items())))


def train(
    cfg: "TrainConfig",
    graphs: Sequence["Graph"],
    outputs: TrainingOutputs | None = None,
    labels: Sequence[Sequence[str] | None] | None = None,
) -> TrainResult:
    """Train a policy on ``graphs``; see ``Trainer``."""
    return Trainer(cfg, graphs, outputs, labels).run()
