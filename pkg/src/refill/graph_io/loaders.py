from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.io import mmread
from scipy.sparse import coo_matrix

from refill.elimination.graph import Graph
from refill.errors import GraphParseError, InvalidInstanceError
from refill.logging import get_logger

logger = get_logger("refill.graph_io")

GraphFormat = Literal["auto", "edgelist", "matrix-pattern"]

MATRIX_MARKET_BANNER = "%%MatrixMarket"
COMMENT_PREFIXES = ("#", "c ", "%")


@dataclass(frozen=True)
class LoadedGraph:
    """A parsed instance with the label of every vertex id."""

    graph: Graph
    labels: tuple[str, ...]
    format: Literal["edgelist", "matrix-pattern"]
    dropped_duplicates: int = 0
    dropped_self_loops: int = 0


def _is_comment(line: str) -> bool:
    return line == "c" or line.startswith(COMMENT_PREFIXES)


class GraphLoader:
    """Reads graphs from edge-list and Matrix Market pattern files.

    Edge-list grammar: ``#``/``c``-prefixed lines are comments; a header of the
    shape ``p <name> <n> <m>`` is skipped; every other line holds two vertex
    labels (an edge) or a single label (an isolated vertex), so ``p`` is an
    ordinary label there. Labels map to contiguous ids in order of first
    appearance.
    """

    def __init__(self) -> None:  # type: ignore[reportMissingSuperCall]
        self.last_error_msg: str | None = None

    def load(self, path: Path | str, fmt: GraphFormat = "auto") -> LoadedGraph:
        """Load ``path`` in the given format, sniffing the header for ``auto``.

        Raises:
            GraphParseError: On malformed lines (with the line number) or an
                unreadable file.
            InvalidInstanceError: If the file holds no vertices.
        """
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except UnicodeDecodeError as e:
            error_msg = f"Graph file {path} is not valid UTF-8: {e}"
            logger.error(error_msg)
            self.last_error_msg = error_msg
            raise GraphParseError(error_msg) from e
        except OSError as e:
            error_msg = f"Failed to read graph file {path}: {e}"
            logger.error(error_msg)
            self.last_error_msg = error_msg
            raise GraphParseError(error_msg) from e

        if fmt == "auto":
            fmt = (
                "matrix-pattern"
                if text.lstrip().startswith(MATRIX_MARKET_BANNER)
                else "edgelist"
            )
        loaded = (
            self._parse_matrix_pattern(path)
            if fmt == "matrix-pattern"
            else self._parse_edgelist(text)
        )
        if loaded.graph.n == 0:
            error_msg = f"Graph file {path} contains no vertices"
            logger.error(error_msg)
            self.last_error_msg = error_msg
            raise InvalidInstanceError(error_msg)
        if loaded.dropped_duplicates or loaded.dropped_self_loops:
            logger.warning(
                "%s: dropped %d duplicate edges and %d self-loops",
                path,
                loaded.dropped_duplicates,
                loaded.dropped_self_loops,
            )
        logger.info(
            "Loaded %s (%s): V=%d, E=%d", path, fmt, loaded.graph.n, loaded.graph.m
        )
        return loaded

    def _parse_edgelist(self, text: str) -> LoadedGraph:
        ids: dict[str, int] = {}
        edges: set[tuple[int, int]] = set()
        duplicates = 0
        self_loops = 0
        for line_number, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or _is_comment(line):
                continue
            tokens = line.split()
            if tokens[0] == "p" and len(tokens) > 2:  # noqa: PLR2004
                continue
            if len(tokens) > 2:  # noqa: PLR2004
                error_msg = f"expected one or two vertex labels, got {len(tokens)}"
                self.last_error_msg = error_msg
                raise GraphParseError(error_msg, line_number)
            for token in tokens:
                ids.setdefault(token, len(ids))
            if len(tokens) == 1:
                continue
            u, v = ids[tokens[0]], ids[tokens[1]]
            if u == v:
                self_loops += 1
                continue
            key = (min(u, v), max(u, v))
            if key in edges:
                duplicates += 1
                continue
            edges.add(key)
        return LoadedGraph(
            graph=Graph.from_edges(len(ids), edges),
            labels=tuple(ids),
            format="edgelist",
            dropped_duplicates=duplicates,
            dropped_self_loops=self_loops,
        )

    def _parse_matrix_pattern(self, path: Path) -> LoadedGraph:
        try:
            matrix = coo_matrix(mmread(path))
        except (ValueError, TypeError, IndexError) as e:
            error_msg = f"Invalid Matrix Market file {path}: {e}"
            logger.error(error_msg)
            self.last_error_msg = error_msg
            raise GraphParseError(error_msg) from e
        rows, cols = matrix.shape
        if rows != cols:
            error_msg = f"Matrix pattern must be square, got {rows}x{cols}"
            self.last_error_msg = error_msg
            raise GraphParseError(error_msg, 2)
        off_diagonal = matrix.row != matrix.col
        self_loops = int(np.count_nonzero(~off_diagonal))
        pairs = {
            (min(int(i), int(j)), max(int(i), int(j)))
            for i, j in zip(
                matrix.row[off_diagonal], matrix.col[off_diagonal], strict=True
            )
        }
        return LoadedGraph(
            graph=Graph.from_edges(rows, pairs),
            labels=tuple(str(i + 1) for i in range(rows)),
            format="matrix-pattern",
            dropped_self_loops=self_loops,
        )


def load_graph(path: Path | str, fmt: GraphFormat = "auto") -> LoadedGraph:
    return GraphLoader().load(path, fmt)


def save_graph(
    graph: Graph,
    path: Path | str,
    labels: tuple[str, ...] | None = None,
    header: dict[str, object] | None = None,
) -> Path:
    """Write ``graph`` as an edge list; isolated vertices get single-label lines.

    Raises:
        OSError: If the file cannot be written.
    """
    path = Path(path)
    names = labels if labels is not None else tuple(str(v) for v in range(graph.n))
    lines = [f"# {key}={value}" for key, value in (header or {}).items()]
    lines.append(f"# V={graph.n} E={graph.m}")
    lines.extend(names[v] for v in range(graph.n) if graph.degree(v) == 0)
    lines.extend(f"{names[u]} {names[v]}" for u, v in graph.edges())
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        error_msg = f"Failed to write graph file {path}: {e}"
        logger.error(error_msg)
        raise OSError(error_msg) from e
    return path
