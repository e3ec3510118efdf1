"""Shared domain types: the hourly table, supervised datasets and errors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple, Optional

import numpy as np

GENERATION = "generation"
WEATHER_COLUMNS = (
    "air_temp",
    "apparent_temp",
    "dew_point",
    "wind_speed",
    "wind_direction",
    "humidity",
)
AQI = "aqi"
STATIC_COLUMNS = ("panel_count", "inverter_type")
HORIZONS = (24, 48, 72)

UNITS = {
    GENERATION: "kWh",
    "air_temp": "degC",
    "apparent_temp": "degC",
    "dew_point": "degC",
    "wind_speed": "m/s",
    "wind_direction": "deg",
    "humidity": "%",
    AQI: "index",
    "panel_count": "count",
    "inverter_type": "code",
}

DEFAULT_GENERATION_MAX = 320.0


class ToolError(Exception):
    """Base class for every failure raised by the toolkit.

    ``kind`` names the failure category; ``context`` carries file/row/column
    details where they are known.
    """

    kind = "ToolError"

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def __str__(self) -> str:
        if not self.context:
            return self.message
        where = ", ".join(f"{k}={v}" for k, v in self.context.items())
        return f"{self.message} ({where})"


class ParseError(ToolError):
    kind = "ParseError"


class SchemaError(ToolError):
    kind = "SchemaError"


class GapError(ToolError):
    kind = "GapError"


class NonFiniteError(ToolError):
    kind = "NonFinite"


class SingularMatrixError(ToolError):
    kind = "SingularMatrix"


class ConvergenceFailure(ToolError):
    kind = "ConvergenceFailure"


class EmptySplitError(ToolError):
    kind = "EmptySplit"


class ConfigError(ToolError):
    kind = "ConfigError"


class IoError(ToolError):
    kind = "IoError"


class HourlyRecord(NamedTuple):
    ts: np.datetime64
    generation: float
    air_temp: float
    apparent_temp: float
    dew_point: float
    wind_speed: float
    wind_direction: float
    humidity: float
    aqi: float


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TimeTable:
    """Timestamp-indexed columns with per-cell missing flags.

    ``timestamps`` is ``datetime64[s]``; every entry of ``columns`` is a float
    array aligned with it and ``missing`` holds the matching boolean masks
    (cell values under a set flag are NaN and carry no meaning). ``gap`` marks
    rows that stand in for an hour with no source data at all.
    """

    timestamps: np.ndarray
    columns: Mapping[str, np.ndarray]
    missing: Mapping[str, np.ndarray]
    gap: np.ndarray
    hourly: bool = False
    diagnostics: Mapping[str, int] = field(default_factory=dict)
    categories: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype="datetime64[s]")
        n = ts.shape[0]
        cols = {}
        miss = {}
        for name, values in self.columns.items():
            v = np.asarray(values, dtype=float)
            if v.shape != (n,):
                raise SchemaError(f"column {name!r} has length {v.shape[0]}, expected {n}")
            m = self.missing.get(name)
            m = ~np.isfinite(v) if m is None else np.asarray(m, dtype=bool) | ~np.isfinite(v)
            cols[name] = _frozen(np.where(m, np.nan, v))
            miss[name] = _frozen(m)
        gap = np.zeros(n, dtype=bool) if self.gap is None else np.asarray(self.gap, dtype=bool)
        object.__setattr__(self, "timestamps", _frozen(ts))
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "missing", miss)
        object.__setattr__(self, "gap", _frozen(gap))
        object.__setattr__(self, "diagnostics", dict(self.diagnostics))
        object.__setattr__(self, "categories", {k: tuple(v) for k, v in self.categories.items()})

    def __len__(self) -> int:
        return self.timestamps.shape[0]

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def missing_count(self, name: str) -> int:
        return int(self.missing[name].sum())

    def column_meta(self) -> list[tuple[str, str, int]]:
        return [(n, UNITS.get(n, ""), self.missing_count(n)) for n in self.columns]

    def take(self, index: np.ndarray, **updates) -> "TimeTable":
        """Row subset (by integer index or boolean mask)."""
        return TimeTable(
            timestamps=self.timestamps[index],
            columns={k: v[index] for k, v in self.columns.items()},
            missing={k: v[index] for k, v in self.missing.items()},
            gap=self.gap[index],
            hourly=updates.get("hourly", self.hourly),
            diagnostics=updates.get("diagnostics", self.diagnostics),
            categories=self.categories,
        )

    def records(self) -> Iterator[HourlyRecord]:
        cols = [self.columns.get(f, np.full(len(self), np.nan)) for f in HourlyRecord._fields[1:]]
        for i, ts in enumerate(self.timestamps):
            yield HourlyRecord(ts, *(float(c[i]) for c in cols))


@dataclass(frozen=True)
class Violation:
    row: Optional[int]
    column: Optional[str]
    rule: str
    severity: str = "error"


_RANGE_RULES = (
    ("wind_speed", 0.0, None, "wind speed non-negative"),
    ("wind_direction", 0.0, 360.0, "wind direction in [0, 360)"),
    ("humidity", 0.0, 100.0, "humidity in [0, 100]"),
    (AQI, 0.0, None, "aqi non-negative"),
)


def validate_table(t: TimeTable, generation_max: float = DEFAULT_GENERATION_MAX) -> list[Violation]:
    """Check table invariants; an empty list means the table is sound.

    Exceeding ``generation_max`` is reported with ``severity="warning"``.
    """
    out: list[Violation] = []
    ts = t.timestamps.astype(np.int64)
    for i in np.flatnonzero(np.diff(ts) <= 0):
        out.append(Violation(int(i + 1), "timestamp", "strictly increasing timestamps"))
    if t.hourly:
        for i in np.flatnonzero(ts % 3600 != 0):
            out.append(Violation(int(i), "timestamp", "timestamp on the hour"))

    for name, values in t.columns.items():
        bad = ~t.missing[name] & ~np.isfinite(values)
        for i in np.flatnonzero(bad):
            out.append(Violation(int(i), name, "finite value"))

    if GENERATION in t.columns:
        g = t.columns[GENERATION]
        present = ~t.missing[GENERATION]
        for i in np.flatnonzero(present & (g < 0)):
            out.append(Violation(int(i), GENERATION, "generation non-negative"))
        for i in np.flatnonzero(present & (g > generation_max)):
            out.append(
                Violation(int(i), GENERATION, f"generation <= {generation_max:g}", "warning")
            )

    for name, lo, hi, rule in _RANGE_RULES:
        if name not in t.columns:
            continue
        v = t.columns[name]
        present = ~t.missing[name]
        bad = present & (v < lo)
        if hi is not None:
            bad |= present & ((v >= hi) if name == "wind_direction" else (v > hi))
        for i in np.flatnonzero(bad):
            out.append(Violation(int(i), name, rule))
    return out


@dataclass(frozen=True)
class SupervisedDataset:
    """Feature matrix and horizon-shifted target.

    ``timestamps[i]`` is the time at which row ``i``'s features are observed;
    its target is the generation ``horizon_hours`` later.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    horizon_hours: int
    timestamps: np.ndarray
    target_scale: str = "raw"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise SchemaError(f"shape mismatch: X {X.shape}, y {y.shape}")
        if X.shape[1] != len(self.feature_names):
            raise SchemaError(
                f"{X.shape[1]} feature columns but {len(self.feature_names)} names"
            )
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise NonFiniteError("supervised dataset contains non-finite values")
        if self.horizon_hours not in HORIZONS:
            raise ConfigError(f"horizon must be one of {HORIZONS}, got {self.horizon_hours}")
        if self.target_scale not in ("raw", "transformed"):
            raise ConfigError(f"unknown target scale {self.target_scale!r}")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "timestamps", _frozen(np.asarray(self.timestamps, dtype="datetime64[s]")))

    def __len__(self) -> int:
        return self.y.shape[0]

    def subset(self, index) -> "SupervisedDataset":
        return SupervisedDataset(
            self.X[index], self.y[index], self.feature_names, self.horizon_hours,
            self.timestamps[index], self.target_scale,
        )
