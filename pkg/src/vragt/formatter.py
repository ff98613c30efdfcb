"""Formatters for result files: per-seed CSVs, aggregate CSV and run metadata."""

import json
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence, Union

import numpy as np
import pandas as pd

from .algorithm import TrajectoryRecord
from .errors import InvalidInputError

PathLike = Union[str, Path]

AGGREGATE_STATS = ("mean", "median", "var")


class BaseFormatter(ABC):
    """Base class for result formatters."""

    # Round-trip precision for binary64
    FLOAT_FORMAT = "%.17g"
    NA_REP = "nan"

    @abstractmethod
    def format(self, data: Any, output_path: PathLike):
        """Format ``data`` and save it to ``output_path``."""
        pass

    def write_frame(self, frame: pd.DataFrame, output_path: PathLike):
        Path(output_path).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(output_path, index=False, float_format=self.FLOAT_FORMAT, na_rep=self.NA_REP)


class TrajectoryFormatter(BaseFormatter):
    """One CSV per seed; diagnostic columns only when the run tracked them."""

    def to_frame(self, record: TrajectoryRecord) -> pd.DataFrame:
        return pd.DataFrame(record.as_dict(), columns=record.columns)

    def format(self, record: TrajectoryRecord, output_path: PathLike):
        self.write_frame(self.to_frame(record), output_path)


class AggregateFormatter(BaseFormatter):
    """Mean, median and variance of every metric across seeds."""

    def aggregate(self, records: Sequence[TrajectoryRecord]) -> pd.DataFrame:
        """
        Stack the seeds' columns and reduce across seeds.

        Args:
            records: Runs sharing one checkpoint grid

        Returns:
            DataFrame with ``k`` and ``<metric>_mean``, ``_median``, ``_var`` columns
        """
        if not records:
            raise InvalidInputError("nothing to aggregate")
        k = records[0].column("k").astype(int)
        for record in records[1:]:
            if not np.array_equal(record.column("k").astype(int), k):
                raise InvalidInputError("records have different checkpoint grids")

        data: Dict[str, np.ndarray] = {"k": k}
        for name in records[0].columns[1:]:
            stacked = np.vstack([r.column(name) for r in records])
            data[f"{name}_mean"] = np.mean(stacked, axis=0)
            data[f"{name}_median"] = np.median(stacked, axis=0)
            # population variance (ddof=0)
            data[f"{name}_var"] = np.var(stacked, axis=0)
        return pd.DataFrame(data)

    def format(self, records: Sequence[TrajectoryRecord], output_path: PathLike):
        self.write_frame(self.aggregate(records), output_path)


class MetadataFormatter(BaseFormatter):
    """``metadata.json``: config, validation outcome, forcing and timing."""

    def format(self, metadata: Mapping[str, Any], output_path: PathLike):
        Path(output_path).parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, 'w') as f:
            json.dump(dict(metadata), f, indent=2, default=str)


def read_result_csv(path: PathLike) -> pd.DataFrame:
    """Read a per-seed or aggregate CSV back into a frame."""
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InvalidInputError(f"could not read results {path}: {e}") from e
    if "k" not in frame.columns:
        raise InvalidInputError(f"{path} has no 'k' column")
    return frame


def metric_columns(frame: pd.DataFrame) -> List[str]:
    """Base metric names present in ``frame``, with aggregate suffixes removed."""
    names: List[str] = []
    for column in frame.columns:
        if column == "k":
            continue
        base = column
        for stat in AGGREGATE_STATS:
            if column.endswith(f"_{stat}"):
                base = column[: -len(stat) - 1]
                break
        if base not in names:
            names.append(base)
    return names
