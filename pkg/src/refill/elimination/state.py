from collections.abc import Sequence
from dataclasses import dataclass
from itertools import combinations
from typing import TYPE_CHECKING

import numpy as np

from refill.elimination.graph import Graph
from refill.errors import (
    ContractViolationError,
    InvalidPermutationError,
    InvalidVertexError,
)

if TYPE_CHECKING:
    from numpy.typing import NDArray


def validate_permutation(pi: Sequence[int], n: int) -> tuple[int, ...]:
    """Return ``pi`` as a tuple after checking it is a bijection on ``[0, n)``.

    Raises:
        InvalidPermutationError: If ``pi`` has the wrong length, repeats a vertex
            or names a vertex outside the graph.
    """
    order = tuple(int(v) for v in pi)
    if len(order) != n or sorted(order) != list(range(n)):
        msg = f"Not a permutation of [0, {n}): {order}"
        raise InvalidPermutationError(msg)
    return order


@dataclass(frozen=True)
class Ordering:
    """A full elimination order with the fill it realizes.

    ``pi[i]`` is the vertex eliminated at step ``i + 1``.
    """

    pi: tuple[int, ...]
    fill_cost: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "pi", validate_permutation(self.pi, len(self.pi)))
        if self.fill_cost < 0:
            msg = f"Fill cost must be nonnegative, got {self.fill_cost}"
            raise ContractViolationError(msg)

    def __len__(self) -> int:
        return len(self.pi)


class ElimState:
    """Mutable elimination-game state over a fixed original graph.

    Eliminated vertices stay in ``current`` as isolated vertices so vertex ids
    remain stable. The state is single-owner: use :meth:`clone` before handing
    it to another rollout.
    """

    def __init__(self, graph: Graph) -> None:  # type: ignore[reportMissingSuperCall]
        self._original = graph
        self._adj: list[set[int]] = [set(nbrs) for nbrs in graph.adjacency]
        self._eliminated = np.zeros(graph.n, dtype=np.bool_)
        self._order: list[int] = []
        self._cumulative_fill = 0
        self._fill_cache: NDArray[np.int64] | None = None

    @property
    def original(self) -> Graph:
        return self._original

    @property
    def n(self) -> int:
        return self._original.n

    @property
    def eliminated(self) -> "NDArray[np.bool_]":
        """Read-only view of the eliminated mask."""
        view = self._eliminated.view()
        view.flags.writeable = False
        return view

    @property
    def order_so_far(self) -> tuple[int, ...]:
        return tuple(self._order)

    @property
    def cumulative_fill(self) -> int:
        return self._cumulative_fill

    @property
    def step_index(self) -> int:
        return len(self._order)

    @property
    def is_done(self) -> bool:
        return len(self._order) == self.n

    def clone(self) -> "ElimState":
        other = ElimState.__new__(ElimState)
        other._original = self._original
        other._adj = [set(nbrs) for nbrs in self._adj]
        other._eliminated = self._eliminated.copy()
        other._order = list(self._order)
        other._cumulative_fill = self._cumulative_fill
        other._fill_cache = self._fill_cache
        return other

    def remaining(self) -> list[int]:
        return [v for v in range(self.n) if not self._eliminated[v]]

    def neighbors(self, v: int) -> tuple[int, ...]:
        """Current neighbors of ``v`` (fill edges included), sorted."""
        return tuple(sorted(self._adj[v]))

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def current_graph(self) -> Graph:
        return Graph(self.n, tuple(frozenset(nbrs) for nbrs in self._adj))

    def current_adjacency_matrix(self) -> "NDArray[np.bool_]":
        matrix = np.zeros((self.n, self.n), dtype=np.bool_)
        for u, nbrs in enumerate(self._adj):
            if nbrs:
                matrix[u, list(nbrs)] = True
        return matrix

    def fill_if_eliminated(self, v: int) -> int:
        """Count the fill edges eliminating ``v`` would add; the state is unchanged."""
        self._check_alive(v)
        return self._count_fill(v)

    def eliminate(self, v: int) -> int:
        """Eliminate ``v``: clique its neighbors, isolate it, and return the fill added."""
        self._check_alive(v)
        nbrs = sorted(self._adj[v])
        added = 0
        for a, b in combinations(nbrs, 2):
            if b not in self._adj[a]:
                self._adj[a].add(b)
                self._adj[b].add(a)
                added += 1
        self._isolate(v, nbrs)
        self._cumulative_fill += added
        return added

    def eliminate_with_edges(self, v: int) -> list[tuple[int, int]]:
        """Eliminate ``v`` and return the fill edges added, each as ``(a, b)`` with ``a < b``."""
        self._check_alive(v)
        nbrs = sorted(self._adj[v])
        added: list[tuple[int, int]] = []
        for a, b in combinations(nbrs, 2):
            if b not in self._adj[a]:
                self._adj[a].add(b)
                self._adj[b].add(a)
                added.append((a, b))
        self._isolate(v, nbrs)
        self._cumulative_fill += len(added)
        return added

    def degree_vector(self) -> "NDArray[np.int64]":
        return np.fromiter((len(nbrs) for nbrs in self._adj), np.int64, self.n)

    def fill_vector(self) -> "NDArray[np.int64]":
        """Per-vertex prospective fill for the current step (0 for eliminated).

        Cached until the next elimination.
        """
        if self._fill_cache is None:
            fills = np.zeros(self.n, dtype=np.int64)
            for v in range(self.n):
                if not self._eliminated[v]:
                    fills[v] = self._count_fill(v)
            fills.flags.writeable = False
            self._fill_cache = fills
        return self._fill_cache

    def _count_fill(self, v: int) -> int:
        nbrs = sorted(self._adj[v])
        return sum(1 for a, b in combinations(nbrs, 2) if b not in self._adj[a])

    def _isolate(self, v: int, nbrs: list[int]) -> None:
        for u in nbrs:
            self._adj[u].discard(v)
        self._adj[v].clear()
        self._eliminated[v] = True
        self._order.append(v)
        self._fill_cache = None

    def _check_alive(self, v: int) -> None:
        if not 0 <= v < self.n:
            msg = f"Vertex {v} outside [0, {self.n})"
            raise InvalidVertexError(msg)
        if self._eliminated[v]:
            msg = f"Vertex {v} is already eliminated"
            raise InvalidVertexError(msg)


def fill_if_eliminated(state: ElimState, v: int) -> int:
    return state.fill_if_eliminated(v)


def eliminate(state: ElimState, v: int) -> int:
    return state.eliminate(v)
