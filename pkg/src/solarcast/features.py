"""Supervised datasets, chronological splits and blocked CV folds."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    AQI,
    GENERATION,
    HORIZONS,
    STATIC_COLUMNS,
    WEATHER_COLUMNS,
    ConfigError,
    EmptySplitError,
    SchemaError,
    SupervisedDataset,
    TimeTable,
)

CALENDAR_FEATURES = ("hour_sin", "hour_cos", "doy_sin", "doy_cos")


def lag_name(lag: int) -> str:
    return f"{GENERATION}_lag{lag}"


def _dense_hourly(t: TimeTable, name: str, span: int, slot: np.ndarray) -> np.ndarray:
    out = np.full(span, np.nan)
    ok = ~t.missing[name] & ~t.gap
    out[slot[ok]] = t.columns[name][ok]
    return out


def _feature_columns(t: TimeTable, lags: Sequence[int], include_static: bool):
    """Dense hourly grid of feature columns plus the generation series."""
    lags = sorted({int(l) for l in lags})
    if not lags or lags[0] < 0:
        raise ConfigError(f"lags must be non-negative hour offsets, got {lags}")
    if len(t) == 0:
        raise EmptySplitError("empty table")
    if GENERATION not in t.columns:
        raise SchemaError(f"table has no {GENERATION!r} column", column=GENERATION)

    hours = t.timestamps.astype("datetime64[h]")
    start = hours.min()
    slot = (hours - start).astype(np.int64)
    span = int(slot.max()) + 1

    gen = _dense_hourly(t, GENERATION, span, slot)
    names: list[str] = []
    cols: list[np.ndarray] = []
    exog = list(WEATHER_COLUMNS) + [AQI]
    if include_static:
        exog += [c for c in STATIC_COLUMNS if c in t.columns]
    for name in exog:
        if name not in t.columns:
            raise SchemaError(f"table has no {name!r} column", column=name)
        names.append(name)
        cols.append(_dense_hourly(t, name, span, slot))
    for lag in lags:
        shifted = np.full(span, np.nan)
        if lag < span:
            shifted[lag:] = gen[: span - lag]
        names.append(lag_name(lag))
        cols.append(shifted)
    X = np.column_stack(cols) if cols else np.empty((span, 0))
    ts = (start + np.arange(span)).astype("datetime64[s]")
    return X, tuple(names), ts, gen


def make_features(t: TimeTable, lags: Sequence[int] = (0,), calendar: bool = True,
                  include_static: bool = False) -> tuple[np.ndarray, tuple[str, ...], np.ndarray]:
    """Feature rows for every hour whose inputs are all present (no target needed).

    Returns ``(X, feature_names, timestamps)`` with the same column layout as
    :func:`make_supervised`.
    """
    X, names, ts, _ = _feature_columns(t, lags, include_static)
    keep = np.isfinite(X).all(axis=1)
    X, ts = X[keep], ts[keep]
    if calendar:
        X = np.hstack([X, calendar_encoding(ts)])
        names = names + CALENDAR_FEATURES
    return X, names, ts


def make_supervised(
    t: TimeTable,
    horizon_hours: int,
    lags: Sequence[int] = (0,),
    calendar: bool = True,
    include_static: bool = False,
) -> SupervisedDataset:
    """Build the horizon-shifted dataset for one forecast horizon.

    Row ``i`` holds weather and AQI at ``ts_i``, generation at ``ts_i - lag``
    for each lag and (optionally) calendar encodings of ``ts_i``; its target
    is generation at ``ts_i + horizon_hours``. Lookups go by timestamp, so a
    row is dropped whenever any of those hours is absent, a gap, or missing.
    """
    if horizon_hours not in HORIZONS:
        raise ConfigError(f"horizon must be one of {HORIZONS}, got {horizon_hours}")
    X, names, ts, gen = _feature_columns(t, lags, include_static)
    span = gen.size
    target = np.full(span, np.nan)
    target[: max(span - horizon_hours, 0)] = gen[horizon_hours:]

    keep = np.isfinite(X).all(axis=1) & np.isfinite(target)
    d = len(names) + (len(CALENDAR_FEATURES) if calendar else 0)
    if keep.sum() < d + 1:
        raise EmptySplitError(
            f"only {int(keep.sum())} rows survive for horizon {horizon_hours}h; need at least {d + 1}"
        )
    ds = SupervisedDataset(X[keep], target[keep], names, horizon_hours, ts[keep])
    return add_calendar_features(ds) if calendar else ds


def calendar_encoding(timestamps: np.ndarray) -> np.ndarray:
    ts = np.asarray(timestamps, dtype="datetime64[s]")
    day = ts.astype("datetime64[D]")
    hour = (ts - day).astype(np.int64) / 3600.0
    doy = (day - day.astype("datetime64[Y]")).astype(np.int64) + hour / 24.0
    h = 2 * np.pi * hour / 24.0
    d = 2 * np.pi * doy / 365.25
    return np.column_stack([np.sin(h), np.cos(h), np.sin(d), np.cos(d)])


def add_calendar_features(ds: SupervisedDataset) -> SupervisedDataset:
    """Append sin/cos of hour-of-day (period 24 h) and day-of-year (365.25 d)."""
    X = np.hstack([ds.X, calendar_encoding(ds.timestamps)])
    return SupervisedDataset(
        X, ds.y, ds.feature_names + CALENDAR_FEATURES, ds.horizon_hours, ds.timestamps, ds.target_scale
    )


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    mode: str = "chronological"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.mode not in ("chronological", "random"):
            raise ConfigError(f"split mode must be 'chronological' or 'random', got {self.mode!r}")


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    if n < 2:
        raise EmptySplitError(f"cannot split {n} rows into two non-empty parts")
    n_train = min(max(math.ceil(spec.train_fraction * n), 1), n - 1)
    if spec.mode == "chronological":
        idx = np.arange(n)
    else:
        idx = np.random.default_rng(spec.seed).permutation(n)
    return np.sort(idx[:n_train]), np.sort(idx[n_train:])


def split(ds: SupervisedDataset, spec: SplitSpec = SplitSpec()) -> tuple[SupervisedDataset, SupervisedDataset]:
    """70:30 train/test partition; chronological by default.

    The train share is ``ceil(fraction * n)`` clamped so both sides keep at
    least one row.
    """
    tr, te = split_indices(len(ds), spec)
    return ds.subset(tr), ds.subset(te)


@dataclass(frozen=True)
class FoldPlan:
    k: int = 5
    mode: str = "blocked"
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ConfigError(f"need at least 2 folds, got {self.k}")
        if self.mode not in ("blocked", "shuffled"):
            raise ConfigError(f"fold mode must be 'blocked' or 'shuffled', got {self.mode!r}")


def make_cv_folds(train, plan: FoldPlan = FoldPlan()) -> list[tuple[np.ndarray, np.ndarray]]:
    """Return ``k`` (fit indices, validation indices) pairs over the rows of ``train``.

    ``train`` is a dataset or a row count.
    Blocked mode cuts ``k`` contiguous validation blocks; the ``n % k``
    leftover rows go one each to the first blocks. Shuffled mode applies the
    same cut to a seeded permutation.
    """
    n = int(train) if isinstance(train, (int, np.integer)) else len(train)
    if n < plan.k:
        raise EmptySplitError(f"{n} rows cannot fill {plan.k} folds")
    sizes = np.full(plan.k, n // plan.k)
    sizes[: n % plan.k] += 1
    order = np.arange(n) if plan.mode == "blocked" else np.random.default_rng(plan.seed).permutation(n)
    folds = []
    stop = 0
    for size in sizes:
        start, stop = stop, stop + size
        val = np.sort(order[start:stop])
        fit = np.sort(np.concatenate([order[:start], order[stop:]]))
        folds.append((fit, val))
    return folds
