from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import networkx as nx
import numpy as np

from refill.errors import InvalidInstanceError, InvalidVertexError

if TYPE_CHECKING:
    from numpy.typing import NDArray


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    The structural stand-in for a symmetric matrix: an edge ``(i, j)`` exists
    exactly when the off-diagonal entry ``A[i, j]`` is nonzero. Instances are
    immutable and may be shared across threads.
    """

    n: int
    adjacency: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        if self.n < 0:
            msg = f"Vertex count must be nonnegative, got {self.n}"
            raise InvalidInstanceError(msg)
        if len(self.adjacency) != self.n:
            msg = f"Adjacency has {len(self.adjacency)} rows for n={self.n}"
            raise InvalidInstanceError(msg)
        for u, nbrs in enumerate(self.adjacency):
            if u in nbrs:
                msg = f"Self-loop at vertex {u}"
                raise InvalidInstanceError(msg)
            for v in nbrs:
                if not 0 <= v < self.n:
                    msg = f"Neighbor {v} of vertex {u} outside [0, {self.n})"
                    raise InvalidInstanceError(msg)
                if u not in self.adjacency[v]:
                    msg = f"Adjacency is not symmetric at ({u}, {v})"
                    raise InvalidInstanceError(msg)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph from an edge iterable; duplicate edges collapse.

        Raises:
            InvalidInstanceError: On self-loops or endpoints outside ``[0, n)``.
        """
        rows: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                msg = f"Self-loop at vertex {u}"
                raise InvalidInstanceError(msg)
            if not (0 <= u < n and 0 <= v < n):
                msg = f"Edge ({u}, {v}) outside [0, {n})"
                raise InvalidInstanceError(msg)
            rows[u].add(v)
            rows[v].add(u)
        return cls(n, tuple(frozenset(r) for r in rows))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, tuple(frozenset() for _ in range(n)))

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "Graph":
        """Convert a networkx graph whose nodes are exactly ``0..n-1``."""
        n = graph.number_of_nodes()
        if sorted(graph.nodes) != list(range(n)):
            msg = "networkx graph nodes must be the integers 0..n-1"
            raise InvalidInstanceError(msg)
        return cls.from_edges(n, ((int(u), int(v)) for u, v in graph.edges))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges())
        return graph

    @property
    def m(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency) // 2

    def neighbors(self, v: int) -> tuple[int, ...]:
        """Return the neighbors of ``v`` in increasing id order."""
        self._check_vertex(v)
        return tuple(sorted(self.adjacency[v]))

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return 0 <= u < self.n and v in self.adjacency[u]

    def edges(self) -> list[tuple[int, int]]:
        """Return every edge once as ``(u, v)`` with ``u < v``, sorted."""
        return [
            (u, v) for u in range(self.n) for v in sorted(self.adjacency[u]) if u < v
        ]

    def adjacency_matrix(self) -> "NDArray[np.bool_]":
        matrix = np.zeros((self.n, self.n), dtype=np.bool_)
        for u, nbrs in enumerate(self.adjacency):
            if nbrs:
                matrix[u, list(nbrs)] = True
        return matrix

    def relabel(self, mapping: Sequence[int]) -> "Graph":
        """Return the isomorphic graph in which vertex ``v`` becomes ``mapping[v]``."""
        if sorted(mapping) != list(range(self.n)):
            msg = "Relabeling must be a permutation of the vertex ids"
            raise InvalidInstanceError(msg)
        return Graph.from_edges(
            self.n, ((mapping[u], mapping[v]) for u, v in self.edges())
        )

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            msg = f"Vertex {v} outside [0, {self.n})"
            raise InvalidVertexError(msg)
