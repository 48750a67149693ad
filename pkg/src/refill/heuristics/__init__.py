from refill.heuristics.greedy import (
    StepRule,
    best_of_restarts,
    candidate_mask,
    greedy_rollout,
    mdh_order,
    mfillh_order,
    min_degree_rule,
    min_fill_rule,
    random_rule,
)
from refill.heuristics.tie_break import TieBreak

__all__ = [
    "StepRule",
    "TieBreak",
    "best_of_restarts",
    "candidate_mask",
    "greedy_rollout",
    "mdh_order",
    "mfillh_order",
    "min_degree_rule",
    "min_fill_rule",
    "random_rule",
]
