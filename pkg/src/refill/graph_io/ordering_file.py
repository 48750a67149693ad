from collections.abc import Mapping, Sequence
from pathlib import Path

from refill.elimination.cost import fill_in_cost
from refill.elimination.graph import Graph
from refill.elimination.state import Ordering
from refill.errors import ContractViolationError, GraphParseError
from refill.logging import get_logger

logger = get_logger("refill.graph_io")


class OrderingWriter:
    """Writes elimination orders, one vertex label per line.

    The file opens with ``# fill=<k>`` followed by ``# key=value`` lines echoing
    the configuration that produced the order.
    """

    def __init__(self, file_path: Path | str) -> None:  # type: ignore[reportMissingSuperCall]
        self._file_path = Path(file_path)
        self._last_error_msg: str | None = None

    @property
    def last_error_msg(self) -> str | None:
        """Return the last error message, if any."""
        return self._last_error_msg

    def get_file_path(self) -> Path:
        return self._file_path

    def write(
        self,
        graph: Graph,
        ordering: Ordering,
        labels: Sequence[str] | None = None,
        header: Mapping[str, object] | None = None,
    ) -> Path:
        """Re-score ``ordering`` on ``graph`` and write it.

        Raises:
            ContractViolationError: If the claimed fill does not match the
                re-scored fill.
            OSError: If the file cannot be written.
        """
        rescored = fill_in_cost(graph, ordering.pi)
        if rescored != ordering.fill_cost:
            msg = (
                f"Ordering claims fill {ordering.fill_cost} but re-scores to "
                f"{rescored}"
            )
            logger.error(msg)
            self._last_error_msg = msg
            raise ContractViolationError(msg)

        names = labels if labels is not None else [str(v) for v in range(graph.n)]
        lines = [f"# fill={ordering.fill_cost}"]
        lines.extend(f"# {key}={value}" for key, value in (header or {}).items())
        lines.extend(names[v] for v in ordering.pi)
        try:
            self._file_path.parent.mkdir(parents=True, exist_ok=True)
            self._file_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        except OSError as e:
            error_msg = f"Failed to write ordering to {self._file_path}: {e}"
            logger.error(error_msg)
            self._last_error_msg = error_msg
            raise OSError(error_msg) from e
        logger.debug(f"Wrote ordering (fill={ordering.fill_cost}) to {self._file_path}")
        return self._file_path


def write_ordering(
    path: Path | str,
    graph: Graph,
    ordering: Ordering,
    labels: Sequence[str] | None = None,
    header: Mapping[str, object] | None = None,
) -> Path:
    return OrderingWriter(path).write(graph, ordering, labels, header)


def read_ordering(
    path: Path | str, labels: Sequence[str] | None = None
) -> tuple[tuple[int, ...], int | None]:
    """Read an ordering file back into vertex ids.

    Returns:
        The order as vertex ids and the ``# fill=`` value, if present.

    Raises:
        GraphParseError: On labels not present in ``labels``.
    """
    ids = {label: i for i, label in enumerate(labels)} if labels is not None else None
    fill: int | None = None
    order: list[int] = []
    text = Path(path).read_text(encoding="utf-8")
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("# fill="):
            fill = int(line.removeprefix("# fill="))
            continue
        if not line or line.startswith("#"):
            continue
        if ids is None:
            if not line.isdigit():
                msg = f"non-numeric vertex {line!r} without a label map"
                raise GraphParseError(msg, line_number)
            order.append(int(line))
        elif line in ids:
            order.append(ids[line])
        else:
            msg = f"unknown vertex label {line!r}"
            raise GraphParseError(msg, line_number)
    return tuple(order), fill
