from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from refill.environment.features import Observation
from refill.environment.fill_env import EnvConfig, FillInEnv, StepResult
from refill.errors import ConfigurationError
from refill.logging import get_logger

logger = get_logger("refill.environment")


class VectorEnv:
    """Lock-step batch of independent environments with per-env auto-reset.

    When an environment finishes, the result it returns carries the finished
    episode and the first observation of the next episode. With
    ``max_workers > 1`` the per-env steps run on a thread pool; results are
    always ordered by env index.
    """

    def __init__(  # type: ignore[reportMissingSuperCall]
        self, configs: Sequence[EnvConfig], max_workers: int = 1
    ) -> None:
        if not configs:
            msg = "VectorEnv needs at least one environment config"
            raise ConfigurationError(msg)
        self._envs = [FillInEnv(config) for config in configs]
        self._max_workers = max(1, max_workers)
        self._observations: list[Observation] = []
        logger.debug(
            "VectorEnv with %d envs (workers=%d)", len(self._envs), self._max_workers
        )

    def __len__(self) -> int:
        return len(self._envs)

    @property
    def envs(self) -> list[FillInEnv]:
        return self._envs

    @property
    def observations(self) -> list[Observation]:
        """Latest observation of every env."""
        return list(self._observations)

    def reset(self) -> list[Observation]:
        self._observations = [env.reset() for env in self._envs]
        return self.observations

    def step(self, actions: Sequence[int]) -> list[StepResult]:
        if len(actions) != len(self._envs):
            msg = f"Expected {len(self._envs)} actions, got {len(actions)}"
            raise ConfigurationError(msg)
        if self._max_workers > 1:
            with ThreadPoolExecutor(max_workers=self._max_workers) as pool:
                results = list(pool.map(self._step_one, range(len(self._envs)), actions))
        else:
            results = [self._step_one(i, a) for i, a in enumerate(actions)]
        self._observations = [result.observation for result in results]
        return results

    def _step_one(self, index: int, action: int) -> StepResult:
        env = self._envs[index]
        result = env.step(action)
        if result.done:
            return replace(result, observation=env.reset())
        return result


def vector_env(configs: Sequence[EnvConfig], max_workers: int = 1) -> VectorEnv:
    return VectorEnv(configs, max_workers)
