from refill.oracle.exact import (
    DEFAULT_LIMIT_N,
    SubsetMemo,
    SubsetSolver,
    exact_min_fill,
    exhaustive_min_fill,
)

__all__ = [
    "DEFAULT_LIMIT_N",
    "SubsetMemo",
    "SubsetSolver",
    "exact_min_fill",
    "exhaustive_min_fill",
]
