"""The elimination game as an episodic environment.

One step eliminates one vertex; the reward is minus the fill it adds, so an
episode's return is minus the fill-in cost of the realized ordering.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

from refill.elimination.state import ElimState, Ordering
from refill.environment.features import (
    AdjacencyMode,
    Observation,
    build_observation,
)
from refill.errors import ConfigurationError, InvalidActionError, InvalidInstanceError
from refill.graph_io.generators import make_rng
from refill.logging import get_logger

if TYPE_CHECKING:
    import numpy as np
    from numpy.typing import NDArray

    from refill.elimination.graph import Graph

logger = get_logger("refill.environment")

GraphSelection = Literal["round-robin", "random"]


@dataclass(frozen=True)
class EnvConfig:
    """Configuration of one environment.

    ``graphs`` is the instance pool; with more than one graph each reset draws
    the next one (round-robin) or a seeded random one.
    """

    graphs: "tuple[Graph, ...]"
    masking_enabled: bool = True
    seed: int = 0
    adjacency_mode: AdjacencyMode = "current"
    selection: GraphSelection = "round-robin"

    def __post_init__(self) -> None:
        if not self.graphs:
            msg = "EnvConfig needs at least one graph"
            raise ConfigurationError(msg)
        if self.adjacency_mode not in {"current", "original"}:
            msg = f"Unknown adjacency mode: {self.adjacency_mode!r}"
            raise ConfigurationError(msg)
        if self.selection not in {"round-robin", "random"}:
            msg = f"Unknown graph selection: {self.selection!r}"
            raise ConfigurationError(msg)


@dataclass(frozen=True)
class EpisodeRecord:
    graph_index: int
    ordering: Ordering

    @property
    def fill(self) -> int:
        return self.ordering.fill_cost


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: float
    done: bool
    fill_added: int
    episode: EpisodeRecord | None = None


class FillInEnv:
    def __init__(self, config: EnvConfig) -> None:  # type: ignore[reportMissingSuperCall]
        self._config = config
        self._rng = make_rng(config.seed)
        self._cursor = 0
        self._graph_index = 0
        self._state: ElimState | None = None
        self._original_adjacency: NDArray[np.bool_] | None = None
        self._last_observation: Observation | None = None
        self.last_error_msg: str | None = None

    @property
    def config(self) -> EnvConfig:
        return self._config

    @property
    def state(self) -> ElimState:
        if self._state is None:
            msg = "Environment has not been reset"
            raise InvalidActionError(msg)
        return self._state

    @property
    def graph_index(self) -> int:
        return self._graph_index

    def reset(self, seed: int | None = None) -> Observation:
        """Start a new episode on the next configured graph.

        Args:
            seed: Reseed the environment; this also rewinds graph selection.

        Raises:
            InvalidInstanceError: If the selected graph has no vertices.
        """
        if seed is not None:
            self._rng = make_rng(seed)
            self._cursor = 0

        graphs = self._config.graphs
        if self._config.selection == "random":
            self._graph_index = int(self._rng.integers(len(graphs)))
        else:
            self._graph_index = self._cursor % len(graphs)
            self._cursor += 1

        graph = graphs[self._graph_index]
        if graph.n == 0:
            msg = f"Graph {self._graph_index} has no vertices"
            logger.error(msg)
            self.last_error_msg = msg
            raise InvalidInstanceError(msg)

        self._state = ElimState(graph)
        self._original_adjacency = (
            graph.adjacency_matrix()
            if self._config.adjacency_mode == "original"
            else None
        )
        self._last_observation = self.observe()
        return self._last_observation

    def observe(self) -> Observation:
        return build_observation(
            self.state,
            masking_enabled=self._config.masking_enabled,
            adjacency_mode=self._config.adjacency_mode,
            original_adjacency=self._original_adjacency,
        )

    def action_mask(self) -> "NDArray[np.bool_]":
        if self._last_observation is None:
            return self.observe().action_mask
        return self._last_observation.action_mask

    def step(self, action: int) -> StepResult:
        """Eliminate ``action`` and return the reward ``-fill_added``.

        Raises:
            InvalidActionError: If the episode is over or ``action`` is masked,
                eliminated or out of range.
        """
        state = self.state
        if state.is_done:
            msg = "Episode is over; call reset()"
            self.last_error_msg = msg
            raise InvalidActionError(msg)
        mask = (
            self._last_observation.action_mask
            if self._last_observation is not None
            else self.observe().action_mask
        )
        allowed = 0 <= action < state.n and bool(mask[action])
        if not allowed:
            msg = f"Action {action} is not allowed at step {state.step_index}"
            logger.error(msg)
            self.last_error_msg = msg
            raise InvalidActionError(msg)

        added = state.eliminate(action)
        done = state.is_done
        episode = (
            EpisodeRecord(
                self._graph_index, Ordering(state.order_so_far, state.cumulative_fill)
            )
            if done
            else None
        )
        self._last_observation = self.observe()
        return StepResult(
            observation=self._last_observation,
            reward=-float(added),
            done=done,
            fill_added=added,
            episode=episode,
        )
