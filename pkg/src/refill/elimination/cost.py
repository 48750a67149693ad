"""Whole-ordering fill accounting.

``fill_in_cost`` and ``elimination_fill_edges`` simulate the elimination game;
``rose_tarjan_fill`` derives the same edge set from path structure alone and
serves as the independent cross-check.
"""

from collections import deque
from collections.abc import Sequence

from refill.elimination.graph import Graph
from refill.elimination.state import ElimState, validate_permutation


def fill_in_cost(g: Graph, pi: Sequence[int]) -> int:
    """Total fill edges created by eliminating ``g`` in the order ``pi``.

    Args:
        g: The original graph; it is not modified.
        pi: A permutation of ``g``'s vertices.

    Returns:
        The number of fill edges, counted once per unordered pair.

    Raises:
        InvalidPermutationError: If ``pi`` is not a bijection on the vertices.
    """
    order = validate_permutation(pi, g.n)
    state = ElimState(g)
    for v in order:
        state.eliminate(v)
    return state.cumulative_fill


def elimination_fill_edges(g: Graph, pi: Sequence[int]) -> set[tuple[int, int]]:
    order = validate_permutation(pi, g.n)
    state = ElimState(g)
    edges: set[tuple[int, int]] = set()
    for v in order:
        edges.update(state.eliminate_with_edges(v))
    return edges


def rose_tarjan_fill(g: Graph, pi: Sequence[int]) -> set[tuple[int, int]]:
    """Fill edges characterized by paths through earlier-ranked vertices.

    A non-edge ``(i, j)`` is fill exactly when ``g`` holds a path from ``i`` to
    ``j`` whose interior vertices are all eliminated before both endpoints. For
    each vertex ``u`` a BFS walks through vertices ranked below ``u`` and
    collects the higher-ranked vertices it touches, so each fill pair is found
    from its lower-ranked endpoint.

    Raises:
        InvalidPermutationError: If ``pi`` is not a bijection on the vertices.
    """
    order = validate_permutation(pi, g.n)
    rank = [0] * g.n
    for position, v in enumerate(order):
        rank[v] = position

    fill: set[tuple[int, int]] = set()
    for u in order:
        seen = {u}
        queue = deque([u])
        while queue:
            x = queue.popleft()
            for y in g.adjacency[x]:
                if y in seen:
                    continue
                seen.add(y)
                if rank[y] < rank[u]:
                    queue.append(y)
                elif not g.has_edge(u, y):
                    fill.add((min(u, y), max(u, y)))
    return fill
