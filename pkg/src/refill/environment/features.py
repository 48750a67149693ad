from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import numpy as np

from refill.heuristics.greedy import candidate_mask

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from refill.elimination.state import ElimState

AdjacencyMode = Literal["current", "original"]

FEATURE_DIM = 3


@dataclass(frozen=True, eq=False)
class Observation:
    """What the policy sees at one step.

    ``features`` rows are (normalized current degree, normalized prospective
    fill, eliminated flag). ``adjacency`` is the message-passing graph.
    """

    features: "NDArray[np.float64]"
    adjacency: "NDArray[np.bool_]"
    action_mask: "NDArray[np.bool_]"
    eliminated: "NDArray[np.bool_]"

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    def same_as(self, other: "Observation") -> bool:
        return (
            np.array_equal(self.features, other.features)
            and np.array_equal(self.adjacency, other.adjacency)
            and np.array_equal(self.action_mask, other.action_mask)
            and np.array_equal(self.eliminated, other.eliminated)
        )


def node_features(state: "ElimState") -> "NDArray[np.float64]":
    """Per-node features, each in ``[0, 1]``.

    Degree is divided by ``n - 1`` and prospective fill by ``C(n - 1, 2)``, the
    largest values either can take, so features do not depend on graph size.
    """
    n = state.n
    features = np.zeros((n, FEATURE_DIM), dtype=np.float64)
    if n == 0:
        return features
    degree_scale = n - 1
    fill_scale = (n - 1) * (n - 2) // 2
    if degree_scale > 0:
        features[:, 0] = state.degree_vector() / degree_scale
    if fill_scale > 0:
        features[:, 1] = np.minimum(state.fill_vector() / fill_scale, 1.0)
    features[:, 2] = state.eliminated
    return features


def build_observation(
    state: "ElimState",
    *,
    masking_enabled: bool = True,
    adjacency_mode: AdjacencyMode = "current",
    original_adjacency: "NDArray[np.bool_] | None" = None,
) -> Observation:
    """Observation of ``state``; depends only on its current adjacency and mask."""
    alive = ~state.eliminated
    if not alive.any():
        mask = np.zeros(state.n, dtype=np.bool_)
    elif masking_enabled:
        mask = candidate_mask(state)
    else:
        mask = alive.copy()

    if adjacency_mode == "original":
        adjacency = (
            original_adjacency
            if original_adjacency is not None
            else state.original.adjacency_matrix()
        )
    else:
        adjacency = state.current_adjacency_matrix()

    return Observation(
        features=node_features(state),
        adjacency=adjacency,
        action_mask=mask,
        eliminated=state.eliminated.copy(),
    )
