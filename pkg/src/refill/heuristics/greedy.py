"""Greedy elimination rules and the candidate mask shared with the RL agent."""

from collections.abc import Callable
from typing import TYPE_CHECKING, Literal

import numpy as np

from refill.elimination.state import ElimState, Ordering
from refill.errors import (
    ConfigurationError,
    ContractViolationError,
    NoVerticesError,
)
from refill.heuristics.tie_break import TieBreak
from refill.logging import get_logger

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from refill.elimination.graph import Graph

logger = get_logger("refill.heuristics")

StepRule = Callable[[ElimState], int]
RuleName = Literal["mdh", "mfillh"]


def _argmin_set(values: "NDArray[np.int64]", alive: "NDArray[np.bool_]") -> list[int]:
    best = values[alive].min()
    return [int(v) for v in np.flatnonzero(alive & (values == best))]


def candidate_mask(state: ElimState) -> "NDArray[np.bool_]":
    """Vertices that have minimum degree or would add minimum fill.

    Args:
        state: A state with at least one remaining vertex.

    Returns:
        Boolean vector of length ``n``; always false for eliminated vertices.

    Raises:
        NoVerticesError: If no vertex remains.
    """
    alive = ~state.eliminated
    if not alive.any():
        msg = "Candidate mask requested with no remaining vertices"
        raise NoVerticesError(msg)
    degrees = state.degree_vector()
    fills = state.fill_vector()
    return alive & (
        (degrees == degrees[alive].min()) | (fills == fills[alive].min())
    )


def min_degree_rule(tie_break: TieBreak | None = None) -> StepRule:
    pick = (tie_break or TieBreak.lowest_id()).make_picker()

    def choose(state: ElimState) -> int:
        return pick(_argmin_set(state.degree_vector(), ~state.eliminated))

    return choose


def min_fill_rule(tie_break: TieBreak | None = None) -> StepRule:
    pick = (tie_break or TieBreak.lowest_id()).make_picker()

    def choose(state: ElimState) -> int:
        return pick(_argmin_set(state.fill_vector(), ~state.eliminated))

    return choose


def random_rule(seed: int, *, masked: bool = False) -> StepRule:
    """Uniform choice over the remaining vertices, or over the candidate mask."""
    rng = np.random.default_rng(seed)

    def choose(state: ElimState) -> int:
        allowed = candidate_mask(state) if masked else ~state.eliminated
        choices = np.flatnonzero(allowed)
        return int(choices[rng.integers(len(choices))])

    return choose


def greedy_rollout(rule: StepRule, g: "Graph") -> Ordering:
    """Drive ``rule`` on a fresh state of ``g`` until every vertex is eliminated.

    Raises:
        ContractViolationError: If the rule returns an eliminated or
            out-of-range vertex.
    """
    state = ElimState(g)
    while not state.is_done:
        v = rule(state)
        if not (0 <= v < g.n) or state.eliminated[v]:
            msg = f"Step rule chose invalid vertex {v} at step {state.step_index}"
            logger.error(msg)
            raise ContractViolationError(msg)
        state.eliminate(v)
    return Ordering(state.order_so_far, state.cumulative_fill)


def mdh_order(g: "Graph", tie_break: TieBreak | None = None) -> Ordering:
    """Minimum degree ordering."""
    return greedy_rollout(min_degree_rule(tie_break), g)


def mfillh_order(g: "Graph", tie_break: TieBreak | None = None) -> Ordering:
    """Minimum fill-in ordering."""
    return greedy_rollout(min_fill_rule(tie_break), g)


_RULES: dict[str, Callable[["Graph", TieBreak | None], Ordering]] = {
    "mdh": mdh_order,
    "mfillh": mfillh_order,
}


def best_of_restarts(
    g: "Graph", rule: RuleName, restarts: int, seed: int = 0
) -> Ordering:
    """Best ordering over the lowest-id run plus ``restarts`` random tie-breaks.

    Restart ``k`` uses a seed spawned from ``seed`` so results are
    reproducible and independent of how many restarts run.
    """
    if rule not in _RULES:
        msg = f"Unknown heuristic: {rule!r}"
        raise ConfigurationError(msg)
    if g.n == 0:
        msg = "Cannot order an empty graph"
        raise NoVerticesError(msg)
    run = _RULES[rule]
    best = run(g, TieBreak.lowest_id())
    children = np.random.SeedSequence(seed).spawn(restarts)
    for child in children:
        candidate = run(g, TieBreak.random(int(child.generate_state(1)[0])))
        if candidate.fill_cost < best.fill_cost:
            best = candidate
    logger.debug(
        "%s best-of-%d on n=%d: fill=%d", rule, restarts, g.n, best.fill_cost
    )
    return best
