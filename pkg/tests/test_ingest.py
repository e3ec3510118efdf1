import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solarcast.core import AQI, GENERATION, WEATHER_COLUMNS, ConfigError, GapError, IoError, ParseError, SchemaError, TimeTable
from solarcast.ingest import (
    AQI_DAILY,
    AQI_HOURLY,
    SOLAR,
    WEATHER,
    detect_aqi_schema,
    load_sources,
    merge_sources,
    parse_csv,
    read_table,
    resample_hourly,
    write_table,
)

from conftest import write_lines

SOLAR_ROWS = [
    "timestamp,generation_kwh",
    "2022-01-01 10:00:00,1",
    "2022-01-01 10:15:00,2",
    "2022-01-01 10:30:00,3",
    "2022-01-01 10:45:00,4",
]


def weather_lines(start_hour, n, day="2022-01-01"):
    lines = ["timestamp," + ",".join(WEATHER_COLUMNS)]
    for h in range(start_hour, start_hour + n):
        d = np.datetime64(day, "h") + h
        lines.append(f"{str(d).replace('T', ' ')}:00:00,20,19,10,3,180,60")
    return lines


def solar_hourly(start_hour, n, day="2022-01-01", value=5.0):
    ts = (np.datetime64(day, "h") + start_hour + np.arange(n)).astype("datetime64[s]")
    return TimeTable(ts, {GENERATION: np.full(n, value)}, {}, None, hourly=True)


def weather_hourly(start_hour, n, day="2022-01-01"):
    ts = (np.datetime64(day, "h") + start_hour + np.arange(n)).astype("datetime64[s]")
    return TimeTable(ts, {c: np.full(n, 1.0) for c in WEATHER_COLUMNS}, {}, None, hourly=True)


def aqi_table(stamps, values):
    ts = np.array(stamps, dtype="datetime64[s]")
    return TimeTable(ts, {AQI: np.asarray(values, dtype=float)}, {}, None)


def test_parse_well_formed_solar(tmp_path):
    t = parse_csv(write_lines(tmp_path / "s.csv", SOLAR_ROWS), SOLAR)
    assert len(t) == 4
    assert t.columns[GENERATION].tolist() == [1, 2, 3, 4]
    assert t.diagnostics["bad_cells"] == 0


def test_shuffled_columns_parse_identically(tmp_path):
    w1 = weather_lines(0, 3)
    header = w1[0].split(",")
    perm = [3, 0, 6, 1, 5, 2, 4]
    w2 = [",".join(row.split(",")[i] for i in perm) for row in w1]
    assert w2[0].split(",") == [header[i] for i in perm]
    a = parse_csv(write_lines(tmp_path / "a.csv", w1), WEATHER)
    b = parse_csv(write_lines(tmp_path / "b.csv", w2), WEATHER)
    assert np.array_equal(a.timestamps, b.timestamps)
    for c in WEATHER_COLUMNS:
        assert np.array_equal(a.columns[c], b.columns[c])


def test_non_numeric_cell_becomes_missing(tmp_path):
    rows = list(SOLAR_ROWS)
    rows[2] = "2022-01-01 10:15:00,n/a"
    path = write_lines(tmp_path / "s.csv", rows)
    t = parse_csv(path, SOLAR)
    # independent count: lines whose generation field is not a number
    bad = 0
    for line in path.read_text().splitlines()[1:]:
        try:
            float(line.split(",")[1])
        except ValueError:
            bad += 1
    assert len(t) == 4
    assert t.missing_count(GENERATION) == bad == 1
    assert t.diagnostics["bad_cells"] == 1


def test_header_and_row_errors(tmp_path):
    with pytest.raises(SchemaError, match="generation_kwh"):
        parse_csv(write_lines(tmp_path / "s.csv", ["timestamp,power", "2022-01-01 00:00:00,1"]), SOLAR)
    with pytest.raises(SchemaError):
        parse_csv(write_lines(tmp_path / "d.csv", ["timestamp,generation_kwh,generation_kwh"]), SOLAR)
    with pytest.raises(IoError):
        parse_csv(tmp_path / "nope.csv", SOLAR)
    rows = SOLAR_ROWS + ["garbage-line", "2022-01-01 11:00:00,1,extra"]
    with pytest.raises(ParseError):
        parse_csv(write_lines(tmp_path / "bad.csv", rows), SOLAR)
    t = parse_csv(write_lines(tmp_path / "ok.csv", rows), SOLAR, max_bad_row_fraction=0.5)
    assert t.diagnostics["bad_rows"] == 2 and len(t) == 4


def test_utf8_bom_header(tmp_path):
    p = tmp_path / "s.csv"
    p.write_bytes(("﻿" + "\n".join(SOLAR_ROWS) + "\n").encode("utf-8"))
    assert len(parse_csv(p, SOLAR)) == 4


def test_static_and_categorical_columns(tmp_path):
    rows = ["timestamp,generation_kwh,site_id,panel_count,inverter_type",
            "2022-01-01 10:00:00,1,A,20,SMA",
            "2022-01-01 10:15:00,1,A,20,Fronius",
            "2022-01-01 10:30:00,1,A,20,SMA"]
    t = parse_csv(write_lines(tmp_path / "s.csv", rows), SOLAR)
    assert t.columns["inverter_type"].tolist() == [0, 1, 0]
    assert t.categories["inverter_type"] == ("SMA", "Fronius")
    rows[2] = "2022-01-01 10:15:00,1,B,20,SMA"
    with pytest.raises(SchemaError, match="single site"):
        parse_csv(write_lines(tmp_path / "s2.csv", rows), SOLAR)


def test_aqi_detection(tmp_path):
    assert detect_aqi_schema(write_lines(tmp_path / "a.csv", ["date,aqi", "2022-01-01,40"])) is AQI_DAILY
    assert detect_aqi_schema(write_lines(tmp_path / "b.csv", ["timestamp,aqi"])) is AQI_HOURLY
    with pytest.raises(SchemaError):
        detect_aqi_schema(write_lines(tmp_path / "c.csv", ["when,aqi"]))


def test_resample_sum_and_mean(tmp_path):
    t = parse_csv(write_lines(tmp_path / "s.csv", SOLAR_ROWS), SOLAR)
    assert resample_hourly(t, "sum").columns[GENERATION].tolist() == [10.0]
    assert resample_hourly(t, "mean").columns[GENERATION].tolist() == [2.5]
    with pytest.raises(ConfigError):
        resample_hourly(t, "median")


def test_resample_marks_gap_hours(tmp_path):
    rows = SOLAR_ROWS + ["2022-01-01 12:00:00,7"]
    r = resample_hourly(parse_csv(write_lines(tmp_path / "s.csv", rows), SOLAR))
    assert len(r) == 3
    assert r.gap.tolist() == [False, True, False]
    assert r.missing[GENERATION].tolist() == [False, True, False]
    assert r.diagnostics["gap_hours"] == 1
    assert r.diagnostics["partial_hours"] == 1


def test_resample_drops_exact_duplicates(tmp_path):
    rows = SOLAR_ROWS + ["2022-01-01 10:15:00,2"]
    r = resample_hourly(parse_csv(write_lines(tmp_path / "s.csv", rows), SOLAR))
    assert r.columns[GENERATION].tolist() == [10.0]
    assert r.diagnostics["duplicate_timestamps"] == 1


def test_resample_empty_table_is_gap_error():
    empty = TimeTable(np.array([], dtype="datetime64[s]"), {GENERATION: []}, {}, None)
    with pytest.raises(GapError):
        resample_hourly(empty)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 4 * 30), min_size=1, max_size=80, unique=True), st.integers(0, 1000))
def test_resample_properties(quarters, seed):
    rng = np.random.default_rng(seed)
    quarters = sorted(quarters)
    ts = (np.datetime64("2022-03-01T00:00") + np.array(quarters) * np.timedelta64(15, "m")).astype("datetime64[s]")
    g = rng.uniform(0, 10, len(ts))
    t = TimeTable(ts, {GENERATION: g, "humidity": rng.uniform(0, 100, len(ts))}, {}, None)
    r = resample_hourly(t, "sum")
    # energy conserved
    assert np.nansum(r.columns[GENERATION]) == pytest.approx(g.sum(), rel=1e-12)
    # one row per covered clock hour, gaps only where no input row
    hours = np.unique(ts.astype("datetime64[h]"))
    assert (~r.gap).sum() == hours.size
    # idempotent on an hourly table with agg=mean
    r2 = resample_hourly(r.take(~r.gap), "mean")
    ok = ~r2.gap
    assert np.array_equal(r2.columns[GENERATION][ok], r.columns[GENERATION][~r.gap])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.integers(0, 1000))
def test_hourly_mean_reduces_variance(n_hours, seed):
    # fully covered hours: the variance of hour means is at most the raw variance
    rng = np.random.default_rng(seed)
    ts = (np.datetime64("2022-03-01T00:00") + np.arange(4 * n_hours) * np.timedelta64(15, "m")).astype("datetime64[s]")
    g = rng.uniform(0, 10, ts.size)
    m = resample_hourly(TimeTable(ts, {GENERATION: g}, {}, None), "mean").columns[GENERATION]
    assert np.var(m) <= np.var(g) + 1e-12


def test_merge_daily_aqi_carry_forward():
    aqi = aqi_table(["2022-01-01"], [42.0])
    m = merge_sources(solar_hourly(0, 24), weather_hourly(0, 24), aqi)
    assert len(m) == 24
    assert np.all(m.columns[AQI] == 42.0)


def test_merge_disjoint_is_gap_error():
    with pytest.raises(GapError):
        merge_sources(solar_hourly(0, 24), weather_hourly(48, 24), aqi_table(["2022-01-01"], [1.0]))


def test_merge_drops_stale_aqi():
    # AQI at day 0 only; hours 0..71 of solar/weather. Staleness 48h: ages
    # 0..48 are fine (49 rows), hours 49..71 (23 rows) are stale.
    aqi = aqi_table(["2022-01-01"], [30.0])
    m = merge_sources(solar_hourly(0, 72), weather_hourly(0, 72), aqi, staleness_hours=48)
    assert m.diagnostics["dropped_stale_aqi"] == 23
    assert m.diagnostics["dropped_incomplete"] == 23
    assert len(m) == 49


def test_merge_row_count_bounded_and_no_lookahead():
    aqi = aqi_table(["2022-01-01T05:00:00"], [30.0])
    m = merge_sources(solar_hourly(0, 30), weather_hourly(3, 30), aqi)
    assert len(m) <= min(30, 30)
    # hours before the first AQI observation cannot use it
    assert m.timestamps[0] == np.datetime64("2022-01-01T05:00:00")


def test_load_sources_and_table_round_trip(tmp_path):
    s = write_lines(tmp_path / "solar.csv", SOLAR_ROWS)
    w = write_lines(tmp_path / "weather.csv", weather_lines(9, 3))
    a = write_lines(tmp_path / "aqi.csv", ["date,aqi", "2022-01-01,55"])
    t = load_sources(s, w, a)
    assert len(t) == 1 and t.columns[GENERATION][0] == 10.0
    write_table(tmp_path / "table.csv", t)
    back = read_table(tmp_path / "table.csv")
    assert np.array_equal(back.timestamps, t.timestamps)
    for c in t.names:
        assert np.array_equal(back.columns[c], t.columns[c])
