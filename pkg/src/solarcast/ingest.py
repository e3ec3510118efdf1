"""Read the solar, weather and AQI source files and merge them hourly."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path

import numpy as np

from ._io import atomic_write_text, fmt
from .core import (
    AQI,
    ConfigError,
    GENERATION,
    STATIC_COLUMNS,
    WEATHER_COLUMNS,
    GapError,
    IoError,
    ParseError,
    SchemaError,
    TimeTable,
)

log = logging.getLogger(__name__)

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"
DATE_FORMAT = "%Y-%m-%d"
DEFAULT_STALENESS_HOURS = 48


class SourceKind(Enum):
    SOLAR_15MIN = "Solar15Min"
    WEATHER = "Weather"
    AQI_DAILY = "AqiDaily"
    AQI_HOURLY = "AqiHourly"


@dataclass(frozen=True)
class SourceSchema:
    kind: SourceKind
    time_column: str
    columns: tuple[str, ...]
    time_format: str = TIMESTAMP_FORMAT
    optional: tuple[str, ...] = ()
    # file column -> table column
    rename: tuple[tuple[str, str], ...] = ()
    categorical: tuple[str, ...] = ()

    def table_name(self, column: str) -> str:
        return dict(self.rename).get(column, column)


SOLAR = SourceSchema(
    SourceKind.SOLAR_15MIN,
    "timestamp",
    ("generation_kwh",),
    optional=("site_id", "panel_count", "inverter_type"),
    rename=(("generation_kwh", GENERATION),),
    categorical=("site_id", "inverter_type"),
)
WEATHER = SourceSchema(SourceKind.WEATHER, "timestamp", WEATHER_COLUMNS)
AQI_DAILY = SourceSchema(SourceKind.AQI_DAILY, "date", (AQI,), time_format=DATE_FORMAT)
AQI_HOURLY = SourceSchema(SourceKind.AQI_HOURLY, "timestamp", (AQI,))


def _read_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError as exc:
        raise IoError(f"no such file: {path}", path=str(path)) from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(f"cannot read {path}: {exc}", path=str(path)) from exc
    if not rows:
        raise SchemaError(f"{path} is empty", path=str(path))
    header = [h.strip() for h in rows[0]]
    return header, rows[1:]


def detect_aqi_schema(path) -> SourceSchema:
    """AQI files come daily (``date,aqi``) or hourly (``timestamp,aqi``)."""
    header, _ = _read_rows(Path(path))
    if "date" in header:
        return AQI_DAILY
    if "timestamp" in header:
        return AQI_HOURLY
    raise SchemaError(f"AQI header needs a 'date' or 'timestamp' column, got {header}", path=str(path))


def parse_csv(path, schema: SourceSchema, max_bad_row_fraction: float = 0.01) -> TimeTable:
    """Parse one source file into a (possibly sub-hourly) table.

    Columns are mapped by header name. Cells that do not parse as numbers
    become missing and are counted under ``diagnostics["bad_cells"]``; rows
    with the wrong field count or an unreadable timestamp are skipped and
    counted under ``"bad_rows"``. More than ``max_bad_row_fraction`` bad rows
    is a :class:`ParseError`.
    """
    path = Path(path)
    header, rows = _read_rows(path)
    for col in (schema.time_column,) + schema.columns + schema.optional:
        if header.count(col) > 1:
            raise SchemaError(f"column {col!r} appears more than once", path=str(path))
    for col in (schema.time_column,) + schema.columns:
        if col not in header:
            raise SchemaError(f"missing column {col!r}", path=str(path), header=",".join(header))
    pos = {h: i for i, h in enumerate(header)}
    wanted = list(schema.columns) + [c for c in schema.optional if c in pos]

    stamps: list[datetime] = []
    values: dict[str, list[float]] = {c: [] for c in wanted if c not in schema.categorical}
    labels: dict[str, list[str]] = {c: [] for c in wanted if c in schema.categorical}
    bad_rows = 0
    bad_cells = 0
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            bad_rows += 1
            log.debug("%s:%d: expected %d fields, got %d", path, lineno, len(header), len(row))
            continue
        try:
            stamps.append(datetime.strptime(row[pos[schema.time_column]].strip(), schema.time_format))
        except ValueError:
            bad_rows += 1
            log.debug("%s:%d: bad timestamp %r", path, lineno, row[pos[schema.time_column]])
            continue
        for c in values:
            cell = row[pos[c]].strip()
            try:
                v = float(cell)
                if not np.isfinite(v):
                    raise ValueError(cell)
            except ValueError:
                v = np.nan
                bad_cells += 1
                log.debug("%s:%d: column %s: unparseable %r", path, lineno, c, cell)
            values[c].append(v)
        for c in labels:
            labels[c].append(row[pos[c]].strip())

    total = bad_rows + len(stamps)
    if total == 0:
        raise ParseError(f"{path} has no data rows", path=str(path))
    if bad_rows > max_bad_row_fraction * total:
        raise ParseError(
            f"{bad_rows} of {total} rows are malformed", path=str(path), tolerance=max_bad_row_fraction
        )

    columns = {schema.table_name(c): np.array(v, dtype=float) for c, v in values.items()}
    categories = {}
    if "site_id" in labels:
        sites = sorted(set(labels.pop("site_id")))
        if len(sites) > 1:
            raise SchemaError(f"expected a single site, found {len(sites)}", path=str(path))
    for c, vals in labels.items():
        # integer codes by order of first appearance
        codes: dict[str, int] = {}
        columns[c] = np.array([codes.setdefault(v, len(codes)) for v in vals], dtype=float)
        categories[c] = tuple(codes)

    ts = np.array(stamps, dtype="datetime64[s]")
    return TimeTable(
        timestamps=ts,
        columns=columns,
        missing={},
        gap=None,
        hourly=False,
        diagnostics={"rows": len(stamps), "bad_rows": bad_rows, "bad_cells": bad_cells},
        categories=categories,
    )


def resample_hourly(t: TimeTable, agg: str = "sum") -> TimeTable:
    """Aggregate to one row per clock hour.

    Generation is combined with ``agg`` (``"sum"`` keeps the hour's energy,
    ``"mean"`` averages); every other column is averaged over its present
    values, static columns take the first value. Exact duplicate timestamps
    keep their first occurrence. Hours inside the covered span with no source
    rows come out as gap rows whose cells are all missing.
    """
    if agg not in ("sum", "mean"):
        raise ConfigError(f"agg must be 'sum' or 'mean', got {agg!r}")
    if len(t) == 0:
        raise GapError("cannot resample an empty table")

    order = np.argsort(t.timestamps, kind="stable")
    ts = t.timestamps[order]
    keep = np.ones(len(ts), dtype=bool)
    keep[1:] = ts[1:] != ts[:-1]
    n_dupes = int((~keep).sum())
    order = order[keep]
    ts = ts[keep]

    hours = ts.astype("datetime64[h]")
    first = hours[0]
    span = int((hours[-1] - first).astype(np.int64)) + 1
    slot = (hours - first).astype(np.int64)
    rows_per_hour = np.bincount(slot, minlength=span)
    gap = rows_per_hour == 0
    covered = rows_per_hour[~gap]
    full = int(covered.max())

    columns = {}
    missing = {}
    for name, col in t.columns.items():
        v = col[order]
        present = ~t.missing[name][order]
        if name in STATIC_COLUMNS:
            out = np.full(span, np.nan)
            idx = np.flatnonzero(present)
            # reversed assignment leaves the first present value of each hour
            out[slot[idx][::-1]] = v[idx][::-1]
        else:
            sums = np.bincount(slot[present], weights=v[present], minlength=span)
            counts = np.bincount(slot[present], minlength=span)
            with np.errstate(invalid="ignore", divide="ignore"):
                if name == GENERATION and agg == "sum":
                    out = np.where(counts > 0, sums, np.nan)
                else:
                    out = sums / counts
        columns[name] = out
        missing[name] = ~np.isfinite(out)

    diagnostics = dict(t.diagnostics)
    diagnostics.update(
        duplicate_timestamps=n_dupes,
        gap_hours=int(gap.sum()),
        partial_hours=int((covered < full).sum()),
    )
    return TimeTable(
        timestamps=(first + np.arange(span)).astype("datetime64[s]"),
        columns=columns,
        missing=missing,
        gap=gap,
        hourly=True,
        diagnostics=diagnostics,
        categories=t.categories,
    )


def _carry_forward(target: np.ndarray, source_ts: np.ndarray, source_vals: np.ndarray,
                   staleness_hours: float) -> tuple[np.ndarray, np.ndarray]:
    """Latest source value at or before each target time; NaN once stale."""
    idx = np.searchsorted(source_ts, target, side="right") - 1
    out = np.full(target.shape[0], np.nan)
    has = idx >= 0
    out[has] = source_vals[idx[has]]
    age = np.full(target.shape[0], np.inf)
    age[has] = (target[has] - source_ts[idx[has]]).astype(np.int64) / 3600.0
    stale = has & (age > staleness_hours)
    out[stale] = np.nan
    return out, stale


def merge_sources(solar: TimeTable, weather: TimeTable, aqi: TimeTable,
                  staleness_hours: float = DEFAULT_STALENESS_HOURS) -> TimeTable:
    """Inner-join solar and weather by hour and attach AQI by carry-forward.

    AQI rows may be coarser than hourly; each hour takes the most recent AQI
    value at or before it, unless that value is older than
    ``staleness_hours``. Rows left with any missing feature are dropped; the
    drop counts land in ``diagnostics``.
    """
    s_ok = solar.timestamps[~solar.gap]
    w_ok = weather.timestamps[~weather.gap]
    common = np.intersect1d(s_ok, w_ok)
    if common.size == 0:
        raise GapError("solar and weather tables do not overlap in time")
    si = np.searchsorted(solar.timestamps, common)
    wi = np.searchsorted(weather.timestamps, common)

    columns = {GENERATION: solar.columns[GENERATION][si]}
    for name in WEATHER_COLUMNS:
        columns[name] = weather.columns[name][wi]

    a_present = ~aqi.missing[AQI] & ~aqi.gap
    a_ts = aqi.timestamps[a_present]
    a_order = np.argsort(a_ts, kind="stable")
    aqi_vals, stale = _carry_forward(common, a_ts[a_order], aqi.columns[AQI][a_present][a_order],
                                     staleness_hours)
    columns[AQI] = aqi_vals
    for name in STATIC_COLUMNS:
        if name in solar.columns:
            columns[name] = solar.columns[name][si]

    complete = np.ones(common.size, dtype=bool)
    for name, v in columns.items():
        complete &= np.isfinite(v)
    if not complete.any():
        raise GapError("no complete rows after merging sources")

    diagnostics = {
        "joined_rows": int(common.size),
        "dropped_stale_aqi": int(stale.sum()),
        "dropped_incomplete": int((~complete).sum()),
        "rows": int(complete.sum()),
    }
    for src, table in (("solar", solar), ("weather", weather), ("aqi", aqi)):
        for k, v in table.diagnostics.items():
            diagnostics[f"{src}_{k}"] = v
    return TimeTable(
        timestamps=common[complete],
        columns={k: v[complete] for k, v in columns.items()},
        missing={},
        gap=None,
        hourly=True,
        diagnostics=diagnostics,
        categories=solar.categories,
    )


def load_sources(solar_path, weather_path, aqi_path, agg: str = "sum",
                 staleness_hours: float = DEFAULT_STALENESS_HOURS) -> TimeTable:
    solar = resample_hourly(parse_csv(solar_path, SOLAR), agg=agg)
    weather = resample_hourly(parse_csv(weather_path, WEATHER), agg="mean")
    aqi = parse_csv(aqi_path, detect_aqi_schema(aqi_path))
    if aqi.timestamps.size and not (aqi.timestamps.astype(np.int64) % 3600 == 0).all():
        aqi = resample_hourly(aqi, agg="mean")
    return merge_sources(solar, weather, aqi, staleness_hours)


def format_timestamp(ts: np.datetime64) -> str:
    return str(ts.astype("datetime64[s]")).replace("T", " ")


def write_table(path, t: TimeTable) -> Path:
    """Write a table as ``timestamp,<columns...>``; missing cells are empty."""
    names = t.names
    lines = [",".join(["timestamp"] + names)]
    for i, ts in enumerate(t.timestamps):
        cells = [format_timestamp(ts)]
        for n in names:
            cells.append("" if t.missing[n][i] else fmt(t.columns[n][i]))
        lines.append(",".join(cells))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def read_table(path) -> TimeTable:
    """Read a table written by :func:`write_table` (hourly, merged)."""
    path = Path(path)
    header, _ = _read_rows(path)
    if not header or header[0] != "timestamp":
        raise SchemaError("merged table must start with a 'timestamp' column", path=str(path))
    schema = SourceSchema(SourceKind.WEATHER, "timestamp", tuple(header[1:]))
    t = parse_csv(path, schema, max_bad_row_fraction=0.0)
    return TimeTable(t.timestamps, t.columns, t.missing, None, hourly=True, diagnostics=t.diagnostics)
