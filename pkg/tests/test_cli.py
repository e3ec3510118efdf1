import json

import numpy as np
import pytest

from solarcast.cli import main
from solarcast.cli.config import config_digest, load_config
from solarcast.cli.synthetic import generate_synthetic, write_sources
from solarcast.core import GENERATION, TimeTable
from solarcast.ingest import read_table, write_table

FAST = """
[params.gbm]
n_estimators = 5
[params.xgb]
n_estimators = 5
[params.rf]
n_estimators = 5
max_depth = 8
[params.gate]
n_estimators = 5
"""


def config(tmp_path, body="", data=None, name="c.toml"):
    data = data or {"table": "src/table.csv"}
    lines = ["[run]", 'out = "out"', "seed = 4", "[data]"] + [f'{k} = "{v}"' for k, v in data.items()]
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n" + body + FAST)
    return str(path)


@pytest.fixture()
def sources(tmp_path):
    t = generate_synthetic(3, 40)
    write_sources(t, tmp_path / "src")
    write_table(tmp_path / "src" / "table.csv", t)
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


def read_diag(path):
    return dict(line.split(",") for line in path.read_text().splitlines()[1:])


def test_ingest_writes_table_and_counts_drops(sources, capsys):
    src = sources / "src"
    lines = (src / "weather.csv").read_text().splitlines()
    del lines[101:106]                  # five weather hours vanish
    for i in (200, 300, 400):           # three rows lose a humidity reading
        cells = lines[i].split(",")
        cells[6] = ""
        lines[i] = ",".join(cells)
    (src / "weather.csv").write_text("\n".join(lines) + "\n")
    cfg = config(sources, data={k: f"src/{k}.csv" for k in ("solar", "weather", "aqi")})
    assert run("ingest", "--config", cfg) == 0
    diag = read_diag(sources / "out" / "ingest_diagnostics.csv")
    assert diag["violations"] == "0"
    assert diag["joined_rows"] == str(960 - 5)
    assert diag["dropped_incomplete"] == "3"
    assert diag["rows"] == str(960 - 5 - 3)
    assert len(read_table(sources / "out" / "table.csv")) == 952


def test_ingest_missing_weather_names_path(sources, capsys):
    (sources / "src" / "weather.csv").unlink()
    cfg = config(sources, data={k: f"src/{k}.csv" for k in ("solar", "weather", "aqi")})
    assert run("ingest", "--config", cfg) == 2
    assert "weather.csv" in capsys.readouterr().err


def test_train_single_model_is_deterministic(sources):
    cfg = config(sources, '[models]\nregular = ["rf"]\n[features]\nhorizons = [24]\n')
    assert run("train", "--config", cfg) == 0
    files = sorted((sources / "out" / "models").iterdir())
    assert [f.name for f in files] == ["regular_rf_24h.json"]
    first = files[0].read_bytes()
    assert run("train", "--config", cfg) == 0
    assert files[0].read_bytes() == first
    meta = json.loads(first)["metadata"]
    assert meta["master_seed"] == 4 and meta["config_digest"] == load_config(cfg).digest


def test_train_filters_by_flags(sources):
    cfg = config(sources)
    assert run("train", "--config", cfg, "--model", "linear", "--methodology", "power_transform",
               "--horizon", "48") == 0
    assert [f.name for f in (sources / "out" / "models").iterdir()] == ["power_transform_linear_48h.json"]


def test_zero_inflated_on_positive_target_exits_3(sources, capsys):
    t = read_table(sources / "src" / "table.csv")
    cols = dict(t.columns)
    cols[GENERATION] = cols[GENERATION] + 1.0
    write_table(sources / "src" / "table.csv", TimeTable(t.timestamps, cols, t.missing, t.gap, hourly=True))
    cfg = config(sources, '[models]\nzero_inflated = ["gbm"]\n[features]\nhorizons = [24]\n')
    assert run("train", "--config", cfg) == 3
    assert "EmptySplit" in capsys.readouterr().err


def test_predict_and_evaluate(sources):
    cfg = config(sources, '[models]\npower_transform = ["linear"]\n[features]\nhorizons = [24]\n')
    assert run("train", "--config", cfg) == 0
    art = sources / "out" / "models" / "power_transform_linear_24h.json"
    out = sources / "pred.csv"
    assert run("predict", "--config", cfg, "--artifact", art, "--out", out) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "timestamp,target_timestamp,prediction"
    table = read_table(sources / "src" / "table.csv")
    assert len(rows) - 1 == len(table)          # every row has lag-0 features
    pred = np.array([float(r.split(",")[2]) for r in rows[1:]])
    assert pred.min() >= 0 and pred.max() <= 320

    # raw-scale values equal the in-process inverse of transformed-scale predictions
    from solarcast.cli.persistence import load_artifact
    from solarcast.features import make_features

    a = load_artifact(art)
    X, _, _ = make_features(table, a.lags, a.calendar, a.include_static)
    z = a.pipeline.predict_model_scale(X)
    manual = np.maximum(a.pipeline.target_transform.invert(z, clip=True), 0)
    assert np.array_equal(pred, manual)

    ev = sources / "ev.csv"
    assert run("evaluate", "--config", cfg, "--out", ev) == 0
    lines = ev.read_text().splitlines()
    assert len(lines) == 3 and lines[1].split(",")[3] == "transformed"


def test_predict_missing_column_exits_4(sources, capsys):
    cfg = config(sources, '[models]\nregular = ["linear"]\n[features]\nhorizons = [24]\n')
    assert run("train", "--config", cfg) == 0
    src = sources / "src" / "table.csv"
    lines = src.read_text().splitlines()
    idx = lines[0].split(",").index("wind_speed")
    dropped = [",".join(c for j, c in enumerate(l.split(",")) if j != idx) for l in lines]
    short = sources / "short.csv"
    short.write_text("\n".join(dropped) + "\n")
    art = sources / "out" / "models" / "regular_linear_24h.json"
    assert run("predict", "--config", cfg, "--artifact", art, "--table", short) == 4
    assert "wind_speed" in capsys.readouterr().err


def test_benchmark_rerun_is_byte_identical(sources):
    cfg = config(sources, '[models]\nregular = ["linear", "rf"]\npower_transform = ["rf"]\n'
                          '[features]\nhorizons = [24]\n[plots]\nmodel = "rf"\n')
    assert run("benchmark", "--config", cfg) == 0
    out = sources / "out"
    files = sorted(p for p in out.rglob("*.csv")) + [out / "report.txt", out / "run_manifest.json"]
    snap = {p: p.read_bytes() for p in files}
    assert run("benchmark", "--config", cfg) == 0
    assert {p: p.read_bytes() for p in files} == snap
    report = (out / "report.csv").read_text().splitlines()
    assert len(report) == 1 + 3
    for row in report[1:]:
        r2, mae, rmse = map(float, row.split(",")[4:])
        assert rmse >= mae
    assert (out / "plots" / "predictions_power_transform_rf_24h.csv").is_file()


@pytest.mark.parametrize("body", [
    "[run]\nsed = 1\n",
    "[features]\nhorizons = [12]\n",
    "[params.rf]\ndepth = 3\n",
    "[models]\nzero_inflated = [\"rf_xgb\"]\n",
    "[bogus]\n",
])
def test_config_errors_exit_5(tmp_path, body):
    path = tmp_path / "bad.toml"
    path.write_text(body)
    assert run("benchmark", "--config", path) == 5


def test_config_digest_ignores_key_order():
    a = {"run": {"seed": 1, "out": "x"}, "features": {"horizons": [24], "lags": [0]}}
    b = {"features": {"lags": [0], "horizons": [24]}, "run": {"out": "x", "seed": 1}}
    assert config_digest(a) == config_digest(b)
    assert config_digest(a) != config_digest({**a, "run": {"seed": 2, "out": "x"}})


def test_synth_command(tmp_path):
    assert run("synth", "--seed", 2, "--days", 10, "--out", tmp_path) == 0
    t = read_table(tmp_path / "table.csv")
    assert len(t) == 240
    assert {p.name for p in tmp_path.iterdir()} == {"solar.csv", "weather.csv", "aqi.csv", "table.csv"}


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_synthetic_structure(seed):
    t = generate_synthetic(seed, 60)
    g = t.columns[GENERATION]
    hours = t.timestamps.astype("datetime64[h]").astype(np.int64) % 24
    assert np.all(g[hours == 0] == 0)
    assert 0.4 <= np.mean(g == 0) <= 0.6
    assert np.array_equal(g, generate_synthetic(seed, 60).columns[GENERATION])
