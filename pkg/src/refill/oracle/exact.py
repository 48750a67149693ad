"""Exact minimum fill-in for small graphs.

Two independent solvers: a subset dynamic program over eliminated-vertex
bitmasks (valid because the graph left after eliminating a set does not depend
on the order the set was eliminated in) and a bounded depth-first enumeration
of permutations that only ever simulates eliminations.
"""

from collections.abc import Iterator
from dataclasses import dataclass, field
import math

from refill.elimination.cost import fill_in_cost
from refill.elimination.graph import Graph
from refill.elimination.state import ElimState, Ordering
from refill.errors import InstanceTooLargeError
from refill.logging import get_logger

logger = get_logger("refill.oracle")

DEFAULT_LIMIT_N = 18
EXHAUSTIVE_LIMIT_N = 8


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass
class SubsetMemo:
    """Best remaining fill per eliminated-set bitmask, with parent pointers."""

    full: int
    best: dict[int, int] = field(default_factory=dict)
    choice: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.best[self.full] = 0


class SubsetSolver:
    def __init__(self, graph: Graph) -> None:  # type: ignore[reportMissingSuperCall]
        self._graph = graph
        self._nbr = [sum(1 << u for u in nbrs) for nbrs in graph.adjacency]
        self.memo = SubsetMemo(full=(1 << graph.n) - 1)
        self.states_expanded = 0

    def eliminated_neighborhoods(self, eliminated: int) -> dict[int, int]:
        """Neighborhood bitmasks of every remaining vertex after eliminating a set.

        A remaining vertex ``v`` is adjacent to ``u`` in the eliminated graph
        when they are adjacent originally or both touch one connected
        component of the eliminated set.
        """
        nbr = self._nbr
        boundaries: list[tuple[int, int]] = []
        unvisited = eliminated
        while unvisited:
            seed = unvisited & -unvisited
            component = frontier = seed
            while frontier:
                reach = 0
                for x in _bits(frontier):
                    reach |= nbr[x]
                frontier = reach & eliminated & ~component
                component |= frontier
            unvisited &= ~component
            touched = 0
            for x in _bits(component):
                touched |= nbr[x]
            boundaries.append((component, touched & ~eliminated))

        remaining = self.memo.full & ~eliminated
        result: dict[int, int] = {}
        for v in _bits(remaining):
            mask = nbr[v] & remaining
            for component, boundary in boundaries:
                if nbr[v] & component:
                    mask |= boundary
            result[v] = mask & ~(1 << v)
        return result

    @staticmethod
    def fill_of(v: int, nbhd: dict[int, int]) -> int:
        own = nbhd[v]
        missing = 0
        for a in _bits(own):
            missing += (own & ~nbhd[a] & ~(1 << a)).bit_count()
        return missing // 2

    def solve(self, eliminated: int = 0) -> int:
        memo = self.memo
        if eliminated in memo.best:
            return memo.best[eliminated]
        self.states_expanded += 1
        nbhd = self.eliminated_neighborhoods(eliminated)
        fills = {v: self.fill_of(v, nbhd) for v in nbhd}

        # A simplicial vertex can always go first without loss.
        simplicial = [v for v, f in fills.items() if f == 0]
        candidates = simplicial[:1] or sorted(fills)

        best_cost = math.inf
        best_v = -1
        for v in candidates:
            cost = fills[v] + self.solve(eliminated | (1 << v))
            if cost < best_cost:
                best_cost, best_v = cost, v
        memo.best[eliminated] = int(best_cost)
        memo.choice[eliminated] = best_v
        return int(best_cost)

    def reconstruct(self) -> tuple[int, ...]:
        order: list[int] = []
        eliminated = 0
        while eliminated != self.memo.full:
            v = self.memo.choice[eliminated]
            order.append(v)
            eliminated |= 1 << v
        return tuple(order)


def exact_min_fill(
    g: Graph, limit_n: int = DEFAULT_LIMIT_N
) -> tuple[Ordering, int]:
    """Globally minimum fill-in ordering by subset dynamic programming.

    Args:
        g: Graph to order.
        limit_n: Largest vertex count accepted.

    Returns:
        An optimal ordering and its fill.

    Raises:
        InstanceTooLargeError: If ``g.n`` exceeds ``limit_n``.
    """
    if g.n > limit_n:
        msg = f"Exact solver limited to n <= {limit_n}, got n={g.n}"
        logger.error(msg)
        raise InstanceTooLargeError(msg)
    solver = SubsetSolver(g)
    cost = solver.solve()
    order = solver.reconstruct()
    logger.debug(
        "Exact min fill n=%d: %d (%d subsets expanded)",
        g.n,
        cost,
        solver.states_expanded,
    )
    return Ordering(order, cost), cost


def exhaustive_min_fill(g: Graph) -> int:
    """Minimum fill over all permutations by direct simulation.

    Prefixes are extended depth-first and abandoned as soon as their fill
    reaches the best complete ordering seen so far.

    Raises:
        InstanceTooLargeError: If ``g.n`` exceeds 8.
    """
    if g.n > EXHAUSTIVE_LIMIT_N:
        msg = f"Exhaustive enumeration limited to n <= {EXHAUSTIVE_LIMIT_N}, got n={g.n}"
        logger.error(msg)
        raise InstanceTooLargeError(msg)
    best = fill_in_cost(g, range(g.n))

    def extend(state: ElimState) -> None:
        nonlocal best
        if state.is_done:
            best = min(best, state.cumulative_fill)
            return
        for v in state.remaining():
            if state.cumulative_fill + state.fill_if_eliminated(v) >= best:
                continue
            child = state.clone()
            child.eliminate(v)
            extend(child)

    extend(ElimState(g))
    return best
