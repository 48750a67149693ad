from collections.abc import Mapping
import csv
from dataclasses import dataclass
import io
from pathlib import Path

from refill.logging import get_logger

logger = get_logger("refill.training")

LOG_COLUMNS = (
    "timesteps",
    "mean_fill",
    "best_fill",
    "policy_loss",
    "value_loss",
    "entropy",
)


@dataclass(frozen=True)
class UpdateRecord:
    """One training-log row, written after every PPO update.

    ``mean_fill`` and ``best_fill`` are ``None`` until an episode completes.
    """

    timesteps: int
    mean_fill: float | None
    best_fill: int | None
    policy_loss: float
    value_loss: float
    entropy: float
    approx_kl: float = 0.0
    clip_fraction: float = 0.0

    def as_row(self) -> list[str]:
        return [
            str(self.timesteps),
            "" if self.mean_fill is None else repr(self.mean_fill),
            "" if self.best_fill is None else str(self.best_fill),
            repr(self.policy_loss),
            repr(self.value_loss),
            repr(self.entropy),
        ]


def _format_header(config: Mapping[str, object]) -> str:
    return "".join(f"# {key}={value}\n" for key, value in config.items())


class TrainingLogWriter:
    """Writes the training curve as CSV, one row per update.

    The file starts with ``# key=value`` lines echoing the configuration,
    then the column header. Rows are appended as updates finish.
    """

    def __init__(self, file_path: Path | str) -> None:  # type: ignore[reportMissingSuperCall]
        self._file_path = Path(file_path)
        self._last_error_msg: str | None = None
        logger.debug(f"Initialized TrainingLogWriter with file path: {self._file_path}")

    @property
    def last_error_msg(self) -> str | None:
        """Return the last error message, if any."""
        return self._last_error_msg

    def get_file_path(self) -> Path:
        return self._file_path

    def _write(self, text: str, mode: str) -> None:
        try:
            self._file_path.parent.mkdir(parents=True, exist_ok=True)
            with self._file_path.open(mode, encoding="utf-8", newline="") as f:
                f.write(text)
        except PermissionError as e:
            error_msg = f"Permission denied writing to {self._file_path}: {e}"
            logger.error(error_msg)
            self._last_error_msg = error_msg
            raise OSError(error_msg) from e
        except OSError as e:
            error_msg = f"Failed to write to {self._file_path}: {e}"
            logger.error(error_msg)
            self._last_error_msg = error_msg
            raise OSError(error_msg) from e

    def start(self, config: Mapping[str, object]) -> None:
        """Truncate the file and write the config echo and column header.

        Raises:
            OSError: If the file cannot be written.
        """
        self._write(_format_header(config) + ",".join(LOG_COLUMNS) + "\n", "w")

    def append(self, record: UpdateRecord) -> None:
        buffer = io.StringIO()
        csv.writer(buffer, lineterminator="\n").writerow(record.as_row())
        self._write(buffer.getvalue(), "a")


def read_training_log(path: Path | str) -> list[dict[str, str]]:
    """Rows of a training log, skipping the ``#`` config echo."""
    lines = [
        line
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if not line.startswith("#")
    ]
    return list(csv.DictReader(lines))
