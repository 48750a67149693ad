"""Experience collection and advantage estimation."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from refill.policy.gcn import (
    GraphBatch,
    PolicyOutput,
    PolicyParams,
    forward_batch,
    sample_action,
)

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from refill.environment.features import Observation
    from refill.environment.fill_env import EpisodeRecord
    from refill.environment.vector_env import VectorEnv


@dataclass(frozen=True)
class CompletedEpisode:
    env_index: int
    step: int
    record: "EpisodeRecord"


@dataclass
class RolloutBuffer:
    """``steps x num_envs`` transitions plus bootstrap values.

    Row ``t`` holds the observation each env acted on at step ``t``, the action
    taken, its log-probability under the behavior policy, the reward, the value
    estimate and whether the step ended an episode.
    """

    observations: list[list["Observation"]]
    actions: "NDArray[np.int64]"
    log_probs: "NDArray[np.float64]"
    rewards: "NDArray[np.float64]"
    values: "NDArray[np.float64]"
    dones: "NDArray[np.bool_]"
    last_values: "NDArray[np.float64]"
    episodes: list[CompletedEpisode] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return int(self.actions.shape[0])

    @property
    def num_envs(self) -> int:
        return int(self.actions.shape[1])

    @property
    def size(self) -> int:
        return self.steps * self.num_envs

    def flat_observations(self) -> list["Observation"]:
        """Observations in row-major ``(t, env)`` order."""
        return [obs for row in self.observations for obs in row]


def evaluate_observations(
    params: PolicyParams, observations: Sequence["Observation"]
) -> list[PolicyOutput]:
    """Run the policy on a list of observations, batching equal-size graphs."""
    outputs: list[PolicyOutput | None] = [None] * len(observations)
    by_size: dict[int, list[int]] = {}
    for index, obs in enumerate(observations):
        by_size.setdefault(obs.n, []).append(index)
    for size in sorted(by_size):
        indices = by_size[size]
        batch = GraphBatch.stack([observations[i] for i in indices])
        logits, log_probs, values = forward_batch(params, batch)
        for row, index in enumerate(indices):
            outputs[index] = PolicyOutput(logits[row], log_probs[row], float(values[row]))
    return [out for out in outputs if out is not None]


def collect_rollouts(
    params: PolicyParams,
    venv: "VectorEnv",
    length: int,
    rng: np.random.Generator,
) -> RolloutBuffer:
    """Step every env ``length`` times with masked sampling.

    Environments auto-reset, so a buffer can span several episodes per env.
    Sampling draws from ``rng`` in env-index order.
    """
    observations = venv.observations or venv.reset()
    num_envs = len(venv)
    shape = (length, num_envs)
    buffer = RolloutBuffer(
        observations=[],
        actions=np.zeros(shape, dtype=np.int64),
        log_probs=np.zeros(shape),
        rewards=np.zeros(shape),
        values=np.zeros(shape),
        dones=np.zeros(shape, dtype=np.bool_),
        last_values=np.zeros(num_envs),
    )
    for t in range(length):
        outputs = evaluate_observations(params, observations)
        buffer.observations.append(list(observations))
        actions: list[int] = []
        for e, out in enumerate(outputs):
            action, log_prob = sample_action(out, rng)
            actions.append(action)
            buffer.actions[t, e] = action
            buffer.log_probs[t, e] = log_prob
            buffer.values[t, e] = out.value

        results = venv.step(actions)
        for e, result in enumerate(results):
            buffer.rewards[t, e] = result.reward
            buffer.dones[t, e] = result.done
            if result.episode is not None:
                buffer.episodes.append(CompletedEpisode(e, t, result.episode))
        observations = [result.observation for result in results]

    final = evaluate_observations(params, observations)
    buffer.last_values[:] = [out.value for out in final]
    return buffer


def compute_gae(
    buffer: RolloutBuffer, gamma: float, gae_lambda: float
) -> tuple["NDArray[np.float64]", "NDArray[np.float64]"]:
    """Generalized advantage estimates and value targets, shape ``(steps, envs)``.

    Advantages are returned unnormalized; the recursion stops at episode ends.
    """
    advantages = np.zeros_like(buffer.rewards)
    running = np.zeros(buffer.num_envs)
    for t in reversed(range(buffer.steps)):
        next_values = buffer.last_values if t == buffer.steps - 1 else buffer.values[t + 1]
        nonterminal = 1.0 - buffer.dones[t].astype(np.float64)
        delta = buffer.rewards[t] + gamma * next_values * nonterminal - buffer.values[t]
        running = delta + gamma * gae_lambda * nonterminal * running
        advantages[t] = running
    return advantages, advantages + buffer.values
