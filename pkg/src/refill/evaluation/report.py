"""Comparison reports: policy fill against the greedy baselines."""

from collections.abc import Mapping, Sequence
import csv
from dataclasses import dataclass, field
import io
import math
from pathlib import Path

import numpy as np

from refill.logging import get_logger

logger = get_logger("refill.evaluation")

REPORT_COLUMNS = (
    "name",
    "V",
    "E",
    "refill_fill",
    "mdh_fill",
    "mfillh_fill",
    "mdh_lowest_id_fill",
    "mfillh_lowest_id_fill",
    "gap_mdh",
    "gap_mfillh",
    "gap_best",
    "samples",
    "restarts",
)
GAP_COLUMNS = ("gap_mdh", "gap_mfillh", "gap_best")
FILL_COLUMNS = ("refill_fill", "mdh_fill", "mfillh_fill")


def improvement(baseline: int, fill: int) -> float:
    """Relative improvement ``(baseline - fill) / baseline``.

    A zero baseline gives 0.0 when ``fill`` is also zero, else ``-inf``.
    """
    if baseline == 0:
        return 0.0 if fill == 0 else -math.inf
    return (baseline - fill) / baseline


@dataclass(frozen=True)
class ReportRow:
    name: str
    vertices: int
    edges: int
    refill_fill: int
    mdh_fill: int
    mfillh_fill: int
    mdh_lowest_id_fill: int
    mfillh_lowest_id_fill: int
    samples: int
    restarts: int

    @property
    def gap_mdh(self) -> float:
        return improvement(self.mdh_fill, self.refill_fill)

    @property
    def gap_mfillh(self) -> float:
        return improvement(self.mfillh_fill, self.refill_fill)

    @property
    def gap_best(self) -> float:
        return improvement(min(self.mdh_fill, self.mfillh_fill), self.refill_fill)

    def as_row(self) -> list[object]:
        return [
            self.name,
            self.vertices,
            self.edges,
            self.refill_fill,
            self.mdh_fill,
            self.mfillh_fill,
            self.mdh_lowest_id_fill,
            self.mfillh_lowest_id_fill,
            repr(self.gap_mdh),
            repr(self.gap_mfillh),
            repr(self.gap_best),
            self.samples,
            self.restarts,
        ]


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ReportRow, ...]
    config: Mapping[str, object] = field(default_factory=dict)

    def mean_gaps(self) -> dict[str, float]:
        """Mean improvement against each baseline over the rows where it is finite.

        A zero baseline fill beaten by a positive policy fill gives an infinite
        gap; ``excluded_gaps`` counts those rows.
        """
        means: dict[str, float] = {}
        for column in GAP_COLUMNS:
            finite = [
                gap for row in self.rows if math.isfinite(gap := getattr(row, column))
            ]
            means[column] = float(np.mean(finite)) if finite else 0.0
        return means

    def excluded_gaps(self) -> dict[str, int]:
        return {
            column: sum(not math.isfinite(getattr(row, column)) for row in self.rows)
            for column in GAP_COLUMNS
        }

    def mean_fills(self) -> dict[str, float]:
        """Mean fill of the policy and of each baseline, keyed ``mean_<column>``."""
        return {
            f"mean_{column}": (
                float(np.mean([getattr(row, column) for row in self.rows]))
                if self.rows
                else 0.0
            )
            for column in FILL_COLUMNS
        }

    def summary(self) -> dict[str, float | int]:
        gaps = {f"mean_{column}": value for column, value in self.mean_gaps().items()}
        excluded = {
            f"excluded_{column}": count for column, count in self.excluded_gaps().items()
        }
        return self.mean_fills() | gaps | excluded

    def to_csv(self) -> str:
        """Config echo, the rows, then the summary as trailing ``#`` lines."""
        buffer = io.StringIO()
        buffer.writelines(f"# {key}={value}\n" for key, value in self.config.items())
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        writer.writerows(row.as_row() for row in self.rows)
        buffer.writelines(f"# {key}={value!r}\n" for key, value in self.summary().items())
        return buffer.getvalue()

    def write_csv(self, path: Path | str) -> Path:
        """Raises OSError if the report cannot be written."""
        file_path = Path(path)
        try:
            file_path.parent.mkdir(parents=True, exist_ok=True)
            file_path.write_text(self.to_csv(), encoding="utf-8")
        except OSError as e:
            error_msg = f"Failed to write report to {file_path}: {e}"
            logger.error(error_msg)
            raise OSError(error_msg) from e
        return file_path

    def format_table(self) -> str:
        header = (
            f"{'instance':<20} {'V':>5} {'E':>6} {'refill':>7} {'mdh':>7} "
            f"{'mfillh':>7} {'gap_mdh':>8} {'gap_mfillh':>10} {'gap_best':>8}"
        )
        lines = [header, "-" * len(header)]
        lines.extend(
            f"{row.name:<20} {row.vertices:>5} {row.edges:>6} {row.refill_fill:>7} "
            f"{row.mdh_fill:>7} {row.mfillh_fill:>7} {row.gap_mdh:>8.1%} "
            f"{row.gap_mfillh:>10.1%} {row.gap_best:>8.1%}"
            for row in self.rows
        )
        if self.rows:
            means = self.mean_gaps()
            fills = self.mean_fills()
            lines.append("-" * len(header))
            lines.append(
                f"{'mean':<20} {'':>5} {'':>6} {fills['mean_refill_fill']:>7.1f} "
                f"{fills['mean_mdh_fill']:>7.1f} {fills['mean_mfillh_fill']:>7.1f} "
                f"{means['gap_mdh']:>8.1%} {means['gap_mfillh']:>10.1%} "
                f"{means['gap_best']:>8.1%}"
            )
            excluded = self.excluded_gaps()
            if any(excluded.values()):
                counts = ", ".join(f"{key}={count}" for key, count in excluded.items())
                lines.append(f"rows with an infinite gap left out of the means: {counts}")
        samples = {row.samples for row in self.rows}
        restarts = {row.restarts for row in self.rows}
        lines.append(
            f"policy samples per instance: {sorted(samples)}; "
            f"baseline restarts: {sorted(restarts)}"
        )
        return "\n".join(lines)


def read_report(path: Path | str) -> list[dict[str, str]]:
    lines = [
        line
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if not line.startswith("#")
    ]
    return list(csv.DictReader(lines))


def rows_from_csv(records: Sequence[Mapping[str, str]]) -> list[ReportRow]:
    return [
        ReportRow(
            name=record["name"],
            vertices=int(record["V"]),
            edges=int(record["E"]),
            refill_fill=int(record["refill_fill"]),
            mdh_fill=int(record["mdh_fill"]),
            mfillh_fill=int(record["mfillh_fill"]),
            mdh_lowest_id_fill=int(record["mdh_lowest_id_fill"]),
            mfillh_lowest_id_fill=int(record["mfillh_lowest_id_fill"]),
            samples=int(record["samples"]),
            restarts=int(record["restarts"]),
        )
        for record in records
    ]
