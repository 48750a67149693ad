"""Instance generators.

All randomness comes from ``make_rng``: numpy's PCG64 bit generator, whose
output stream for a given seed is fixed across platforms and numpy releases.
"""

from itertools import combinations

import networkx as nx
import numpy as np

from refill.elimination.graph import Graph
from refill.errors import InvalidInstanceError


def make_rng(seed: int | np.random.SeedSequence | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gen_grid(rows: int, cols: int) -> Graph:
    """``rows x cols`` lattice with 4-neighbor edges; vertex id = ``r * cols + c``."""
    if rows < 1 or cols < 1:
        msg = f"Grid dimensions must be positive, got {rows}x{cols}"
        raise InvalidInstanceError(msg)
    lattice = nx.grid_2d_graph(rows, cols)
    return Graph.from_edges(
        rows * cols,
        ((r1 * cols + c1, r2 * cols + c2) for (r1, c1), (r2, c2) in lattice.edges),
    )


def gen_gnp(n: int, p: float, seed: int) -> Graph:
    """Erdős–Rényi G(n, p).

    Pairs ``(i, j)``, ``i < j``, are visited in lexicographic order and each
    consumes one uniform draw; the pair becomes an edge when the draw is
    below ``p``.
    """
    if n < 1:
        msg = f"G(n, p) needs n >= 1, got {n}"
        raise InvalidInstanceError(msg)
    if not 0.0 <= p <= 1.0:
        msg = f"Edge probability must lie in [0, 1], got {p}"
        raise InvalidInstanceError(msg)
    rows, cols = np.triu_indices(n, k=1)
    keep = make_rng(seed).random(rows.size) < p
    return Graph.from_edges(n, zip(rows[keep].tolist(), cols[keep].tolist(), strict=True))


def gen_path(n: int) -> Graph:
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def gen_cycle(n: int) -> Graph:
    if n < 3:
        msg = f"A cycle needs at least 3 vertices, got {n}"
        raise InvalidInstanceError(msg)
    return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))


def gen_complete(n: int) -> Graph:
    return Graph.from_edges(n, combinations(range(n), 2))


def gen_star(leaves: int) -> Graph:
    """Star with center 0 and leaves ``1..leaves``."""
    return Graph.from_edges(leaves + 1, ((0, i) for i in range(1, leaves + 1)))
