from collections.abc import Callable, Generator
import logging
from pathlib import Path

import numpy as np
import pytest

from refill.elimination.graph import Graph
from refill.graph_io.generators import gen_cycle, gen_grid, gen_gnp, gen_path, gen_star


@pytest.fixture(autouse=True)
def clear_logger_cache() -> Generator[None, None, None]:
    """Clear the logger cache before and after each test to prevent test interference."""
    from refill import logging as refill_logging

    def reset() -> None:
        refill_logging.COMPONENT_LOGGERS.clear()
        for logger_name in list(logging.Logger.manager.loggerDict.keys()):
            if logger_name.startswith(("refill", "test_")):
                logger = logging.getLogger(logger_name)
                for handler in logger.handlers[:]:
                    handler.close()
                    logger.removeHandler(handler)
                logger.propagate = True

    reset()
    yield
    reset()


@pytest.fixture
def temp_log_dir(tmp_path: Path) -> Generator[Path, None, None]:
    log_dir = tmp_path / "logs"
    log_dir.mkdir()
    yield log_dir


@pytest.fixture
def star3() -> Graph:
    """Center 0 with leaves 1, 2, 3."""
    return gen_star(3)


@pytest.fixture
def path3() -> Graph:
    return gen_path(3)


@pytest.fixture
def path5() -> Graph:
    return gen_path(5)


@pytest.fixture
def cycle4() -> Graph:
    return gen_cycle(4)


@pytest.fixture
def k4() -> Graph:
    return Graph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])


@pytest.fixture
def figure_graph() -> Graph:
    """Five vertices where vertex 0 touches the pairwise nonadjacent 1, 3, 4.

    Eliminating in id order adds exactly (1, 3), (1, 4), (3, 4); eliminating 0
    last adds nothing.
    """
    return Graph.from_edges(5, [(0, 1), (0, 3), (0, 4), (2, 3)])


@pytest.fixture
def grid5() -> Graph:
    return gen_grid(5, 5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


RandomGraphFactory = Callable[..., Graph]


@pytest.fixture
def random_graph(rng: np.random.Generator) -> RandomGraphFactory:
    """Draw G(n, p) graphs with n in ``[n_min, n_max]`` and p in ``[0.1, 0.9]``."""

    def draw(n_min: int = 1, n_max: int = 8) -> Graph:
        n = int(rng.integers(n_min, n_max + 1))
        p = float(rng.uniform(0.1, 0.9))
        return gen_gnp(n, p, int(rng.integers(2**31)))

    return draw


@pytest.fixture
def write_edgelist() -> Callable[[Path, Graph], Path]:
    """Write a graph as an edge list, isolated vertices as single labels."""

    def write(path: Path, graph: Graph) -> Path:
        lines = [str(v) for v in range(graph.n) if graph.degree(v) == 0]
        lines.extend(f"{u} {v}" for u, v in graph.edges())
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return write
