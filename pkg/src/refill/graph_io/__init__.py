from refill.graph_io.generators import (
    gen_complete,
    gen_cycle,
    gen_gnp,
    gen_grid,
    gen_path,
    gen_star,
    make_rng,
)
from refill.graph_io.loaders import GraphLoader, LoadedGraph, load_graph, save_graph
from refill.graph_io.ordering_file import OrderingWriter, read_ordering, write_ordering

__all__ = [
    "GraphLoader",
    "LoadedGraph",
    "OrderingWriter",
    "gen_complete",
    "gen_cycle",
    "gen_gnp",
    "gen_grid",
    "gen_path",
    "gen_star",
    "load_graph",
    "make_rng",
    "read_ordering",
    "save_graph",
    "write_ordering",
]
