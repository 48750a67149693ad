from refill.elimination.cost import (
    elimination_fill_edges,
    fill_in_cost,
    rose_tarjan_fill,
)
from refill.elimination.graph import Graph
from refill.elimination.state import (
    ElimState,
    Ordering,
    eliminate,
    fill_if_eliminated,
    validate_permutation,
)

__all__ = [
    "ElimState",
    "Graph",
    "Ordering",
    "eliminate",
    "elimination_fill_edges",
    "fill_if_eliminated",
    "fill_in_cost",
    "rose_tarjan_fill",
    "validate_permutation",
]
