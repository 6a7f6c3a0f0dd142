"""Column-oriented tabular data, empirical quantiles, and baseline vectors.

Everything downstream (explainers, models, the service) consumes the
types defined here.  Columns are either numeric (float cells) or
categorical (string levels); missing cells are rejected at load time.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

Cell = Union[float, str]


class Kind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class TabularError(ValueError):
    """Base class for dataset construction and query errors."""


class LoadError(TabularError):
    """Raised when a CSV source cannot be turned into a Dataset."""


@dataclass(frozen=True)
class FeatureColumn:
    """A single named column with homogeneous cells.

    For categorical columns ``distinct_levels`` lists the observed
    levels in first-appearance order; for numeric columns it is empty.
    """

    name: str
    kind: Kind
    values: tuple
    distinct_levels: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.values) == 0:
            raise TabularError(f"column {self.name!r} has no values")
        if self.kind is Kind.CATEGORICAL:
            seen = dict.fromkeys(self.values)
            if tuple(seen) != self.distinct_levels:
                raise TabularError(
                    f"column {self.name!r}: distinct_levels must list observed "
                    "levels in first-appearance order"
                )

    @staticmethod
    def numeric(name: str, values: Iterable[float]) -> "FeatureColumn":
        vals = tuple(float(v) for v in values)
        if any(not math.isfinite(v) for v in vals):
            raise TabularError(f"column {name!r} contains non-finite values")
        return FeatureColumn(name, Kind.NUMERIC, vals)

    @staticmethod
    def categorical(name: str, values: Iterable[str]) -> "FeatureColumn":
        vals = tuple(str(v) for v in values)
        return FeatureColumn(name, Kind.CATEGORICAL, vals, tuple(dict.fromkeys(vals)))

    @property
    def n_levels(self) -> int:
        return len(self.distinct_levels)

    def as_array(self) -> np.ndarray:
        if self.kind is not Kind.NUMERIC:
            raise TabularError(f"column {self.name!r} is not numeric")
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of feature columns plus an optional target."""

    columns: tuple[FeatureColumn, ...]
    target: Optional[FeatureColumn] = None

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if self.target is not None:
            names.append(self.target.name)
        if len(set(names)) != len(names):
            raise TabularError("column names must be unique")
        lengths = {len(c.values) for c in self.columns}
        if self.target is not None:
            lengths.add(len(self.target.values))
        if len(lengths) > 1:
            raise TabularError("all columns must have the same number of rows")

    @property
    def n_rows(self) -> int:
        return len(self.columns[0].values)

    @property
    def n_features(self) -> int:
        return len(self.columns)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> FeatureColumn:
        for c in self.columns:
            if c.name == name:
                return c
        raise TabularError(f"no feature column named {name!r}")

    def feature_index(self, name: str) -> int:
        for j, c in enumerate(self.columns):
            if c.name == name:
                return j
        raise TabularError(f"no feature column named {name!r}")

    def row(self, i: int) -> tuple[Cell, ...]:
        if not 0 <= i < self.n_rows:
            raise TabularError(f"row index {i} out of range [0, {self.n_rows})")
        return tuple(c.values[i] for c in self.columns)

    def rows(self) -> list[tuple[Cell, ...]]:
        return [self.row(i) for i in range(self.n_rows)]


@dataclass(frozen=True)
class QuantileGrid:
    """Probability levels at which numeric features are probed."""

    levels: tuple[float, ...]
    robust: bool

    def __post_init__(self):
        if len(self.levels) < 2:
            raise TabularError("a quantile grid needs at least 2 levels")
        if any(not 0.0 <= q <= 1.0 for q in self.levels):
            raise TabularError("quantile levels must lie in [0, 1]")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise TabularError("quantile levels must be strictly increasing")

    @property
    def size(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class BaselineVector:
    """Reference input the perturbation sweeps are anchored to.

    ``origin`` is ``"global_mean_mode"`` for the dataset mean/mode
    baseline, or ``"observation"`` with ``row`` set for a specific data
    point.
    """

    entries: tuple[Cell, ...]
    origin: str
    row: Optional[int] = None


@dataclass(frozen=True)
class FeatureSummary:
    mean_or_mode: Cell
    minimum: Optional[float]
    maximum: Optional[float]
    distinct_count: int


def empirical_quantile(column: FeatureColumn, q: float) -> float:
    """Linearly interpolated order statistic of a numeric column.

    With sorted values v_1 <= ... <= v_N and h = (N-1)q, the result is
    v_{floor(h)+1} + (h - floor(h)) * (v_{floor(h)+2} - v_{floor(h)+1}).
    """
    if column.kind is not Kind.NUMERIC:
        raise TabularError(f"column {column.name!r} is not numeric")
    if not 0.0 <= q <= 1.0:
        raise TabularError(f"quantile level {q} outside [0, 1]")
    return float(np.quantile(column.as_array(), q, method="linear"))


def quantile_grid(Q: int, robust: bool = False) -> QuantileGrid:
    """Equally spaced levels: over [0, 1], or [0.1, 0.9] when robust."""
    if Q < 2:
        raise TabularError(f"grid size must be >= 2, got {Q}")
    lo, hi = (0.1, 0.9) if robust else (0.0, 1.0)
    levels = tuple(np.linspace(lo, hi, Q).tolist())
    return QuantileGrid(levels=levels, robust=robust)


DEFAULT_GRID_SIZE = 50


def feature_summary(column: FeatureColumn) -> FeatureSummary:
    """Mean/min/max for numeric columns; mode and level count otherwise.

    Mode ties break by first appearance in the column.
    """
    if column.kind is Kind.NUMERIC:
        arr = column.as_array()
        return FeatureSummary(
            mean_or_mode=float(arr.mean()),
            minimum=float(arr.min()),
            maximum=float(arr.max()),
            distinct_count=len(set(column.values)),
        )
    counts: dict[str, int] = {}
    for v in column.values:
        counts[v] = counts.get(v, 0) + 1
    mode = max(counts, key=lambda lvl: counts[lvl])  # dict preserves first appearance
    return FeatureSummary(
        mean_or_mode=mode,
        minimum=None,
        maximum=None,
        distinct_count=len(column.distinct_levels),
    )


def baseline_vector(dataset: Dataset, origin: str = "global_mean_mode",
                    row: Optional[int] = None) -> BaselineVector:
    """Per-feature mean/mode baseline, or a verbatim copy of one row."""
    if origin == "global_mean_mode":
        entries = tuple(feature_summary(c).mean_or_mode for c in dataset.columns)
        return BaselineVector(entries=entries, origin=origin)
    if origin == "observation":
        if row is None:
            raise TabularError("observation baseline needs a row index")
        return BaselineVector(entries=dataset.row(row), origin=origin, row=row)
    raise TabularError(f"unknown baseline origin {origin!r}")


def _parse_numeric(cell: str) -> Optional[float]:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(source: Union[bytes, str, IO[bytes], IO[str]],
             target_name: Optional[str] = None,
             kind_overrides: Optional[Mapping[str, Kind]] = None) -> Dataset:
    """Parse a header-first CSV into a typed Dataset.

    A column is numeric iff every cell parses as a finite real number,
    unless overridden via ``kind_overrides``.  Empty cells are rejected
    with the offending row/column named.
    """
    if isinstance(source, bytes):
        text: IO[str] = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        text = io.StringIO(source)
    elif hasattr(source, "read"):
        raw = source.read()
        text = io.StringIO(raw.decode("utf-8") if isinstance(raw, bytes) else raw)
    else:
        raise LoadError(f"unsupported CSV source type {type(source).__name__}")

    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        raise LoadError("empty CSV source") from None
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise LoadError(f"duplicate header(s): {', '.join(dupes)}")

    raw_columns: list[list[str]] = [[] for _ in header]
    for row_idx, row in enumerate(reader):
        if len(row) != len(header):
            raise LoadError(f"row {row_idx + 1} has {len(row)} cells, expected {len(header)}")
        for col_idx, cell in enumerate(row):
            if cell.strip() == "":
                raise LoadError(
                    f"missing value at row {row_idx + 1}, column {header[col_idx]!r}"
                )
            raw_columns[col_idx].append(cell.strip())
    if not raw_columns or not raw_columns[0]:
        raise LoadError("CSV has a header but no data rows")

    overrides = dict(kind_overrides or {})
    unknown = set(overrides) - set(header)
    if unknown:
        raise LoadError(f"kind override(s) for unknown column(s): {sorted(unknown)}")

    columns: list[FeatureColumn] = []
    target: Optional[FeatureColumn] = None
    for name, cells in zip(header, raw_columns):
        parsed = [_parse_numeric(c) for c in cells]
        kind = overrides.get(name)
        if kind is None:
            kind = Kind.NUMERIC if all(v is not None for v in parsed) else Kind.CATEGORICAL
        if kind is Kind.NUMERIC:
            bad = next((i for i, v in enumerate(parsed) if v is None), None)
            if bad is not None:
                raise LoadError(
                    f"column {name!r} forced numeric but row {bad + 1} "
                    f"value {cells[bad]!r} does not parse"
                )
            col = FeatureColumn.numeric(name, [v for v in parsed if v is not None])
        else:
            col = FeatureColumn.categorical(name, cells)
        if name == target_name:
            target = col
        else:
            columns.append(col)
    if target_name is not None and target is None:
        raise LoadError(f"target column {target_name!r} not present in CSV header")
    return Dataset(columns=tuple(columns), target=target)
