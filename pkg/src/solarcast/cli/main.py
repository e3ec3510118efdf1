"""``solarcast`` command-line entry point.

Exit codes: 0 ok, 2 ingest/data, 3 training, 4 predict/schema, 5 config.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .._io import atomic_write_text, fmt
from ..core import (
    ConfigError,
    ConvergenceFailure,
    EmptySplitError,
    GapError,
    IoError,
    NonFiniteError,
    ParseError,
    SchemaError,
    SingularMatrixError,
    TimeTable,
    ToolError,
    validate_table,
)
from ..eval import (
    emit_plot_data,
    errors_to_csv,
    evaluate,
    primary_reports,
    reports_to_csv,
    reports_to_text,
)
from ..eval.benchmark import benchmark_matrix, cell_seed, fit_cell, horizon_datasets
from ..features import make_features
from ..ingest import format_timestamp, load_sources, read_table, write_table
from ..pipeline import METHODOLOGIES
from .config import RunConfig, load_config
from .persistence import ModelArtifact, artifact_name, load_artifact, save_artifact
from .synthetic import generate_synthetic, write_sources

log = logging.getLogger("solarcast")

EXIT_OK, EXIT_INGEST, EXIT_TRAIN, EXIT_PREDICT, EXIT_CONFIG = 0, 2, 3, 4, 5
_TRAIN_ERRORS = (ConvergenceFailure, SingularMatrixError, EmptySplitError, NonFiniteError)


def exit_code(exc: ToolError, command: str) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, SchemaError):
        return EXIT_PREDICT if command in ("predict", "evaluate") else EXIT_INGEST
    if isinstance(exc, (IoError, ParseError, GapError)):
        return EXIT_INGEST
    if isinstance(exc, _TRAIN_ERRORS):
        return EXIT_TRAIN
    return EXIT_TRAIN


def _ingest_table(cfg: RunConfig) -> TimeTable:
    paths = {"solar": cfg.solar, "weather": cfg.weather, "aqi": cfg.aqi}
    for name, p in paths.items():
        if p is None:
            raise ConfigError(f"[data] {name} path is not configured")
        if not Path(p).is_file():
            raise IoError(f"{name} file not found: {p}", path=str(p))
    return load_sources(cfg.solar, cfg.weather, cfg.aqi, cfg.agg, cfg.staleness_hours)


def _load_table(cfg: RunConfig) -> TimeTable:
    """The merged table: read from disk if present, otherwise ingested from the sources."""
    path = cfg.table_path
    if path.is_file():
        return read_table(path)
    if cfg.table is not None:
        raise IoError(f"merged table not found: {path}", path=str(path))
    if cfg.solar is None:
        raise IoError(f"merged table not found: {path} (run `solarcast ingest` first)", path=str(path))
    return _ingest_table(cfg)


def _kv_csv(d: dict) -> str:
    return "key,value\n" + "".join(f"{k},{d[k]}\n" for k in sorted(d))


def cmd_ingest(cfg: RunConfig, args) -> int:
    table = _ingest_table(cfg)
    problems = validate_table(table, cfg.generation_max)
    errors = [v for v in problems if v.severity == "error"]
    diag = dict(table.diagnostics)
    diag["violations"] = len(errors)
    diag["warnings"] = len(problems) - len(errors)
    out = cfg.out_dir
    write_table(out / "table.csv", table)
    atomic_write_text(out / "ingest_diagnostics.csv", _kv_csv(diag))
    if errors:
        lines = ["row,column,rule,severity"] + [f"{v.row},{v.column},{v.rule},{v.severity}" for v in problems]
        atomic_write_text(out / "ingest_violations.csv", "\n".join(lines) + "\n")
        raise SchemaError(f"merged table violates {len(errors)} invariant(s); see ingest_violations.csv")
    print(f"wrote {out / 'table.csv'}: {len(table)} rows, "
          f"{diag.get('dropped_incomplete', 0)} dropped incomplete, {diag.get('dropped_stale_aqi', 0)} stale AQI")
    return EXIT_OK


def _selected_cells(cfg: RunConfig, args) -> list[tuple[str, str, int]]:
    cells = cfg.benchmark().cells()
    if getattr(args, "methodology", None):
        cells = [c for c in cells if c[0] == args.methodology]
    if getattr(args, "model", None):
        cells = [c for c in cells if c[1] == args.model]
    if not cells:
        raise ConfigError("no (methodology, model, horizon) cell matches the configuration and overrides")
    return cells


def cmd_train(cfg: RunConfig, args) -> int:
    table = _load_table(cfg)
    bench = cfg.benchmark()
    data = horizon_datasets(table, bench)
    out = cfg.out_dir / "models"
    for meth, kind, h in _selected_cells(cfg, args):
        train, _ = data[h]
        seed = cell_seed(cfg.seed, meth, kind, h)
        pipeline = fit_cell(bench, meth, kind, train, seed)
        meta = {"seed": seed, "master_seed": cfg.seed, "config_digest": cfg.digest,
                "trained_through": format_timestamp(train.timestamps.max()), "train_rows": len(train.y)}
        art = ModelArtifact(pipeline, cfg.lags, cfg.calendar, cfg.include_static, meta)
        path = save_artifact(out / artifact_name(meth, kind, h), art)
        print(f"wrote {path}")
    return EXIT_OK


def predict_table(art: ModelArtifact, table: TimeTable) -> tuple[np.ndarray, np.ndarray]:
    """Raw-scale predictions for every row of ``table`` with complete features."""
    X, names, ts = make_features(table, art.lags, art.calendar, art.include_static)
    p = art.pipeline
    if names != p.feature_names:
        missing = [n for n in p.feature_names if n not in names]
        raise SchemaError(f"table features do not match the artifact; missing {missing or 'none'}, "
                          f"got {list(names)}")
    return ts, p.predict(X)


def cmd_predict(cfg: RunConfig, args) -> int:
    if not args.artifact:
        raise ConfigError("predict needs --artifact")
    art = load_artifact(args.artifact)
    h = art.pipeline.horizon_hours
    if args.horizon is not None and args.horizon != h:
        raise SchemaError(f"artifact forecasts {h}h ahead, not {args.horizon}h")
    table = read_table(args.table) if args.table else _load_table(cfg)
    ts, pred = predict_table(art, table)
    target = ts + np.timedelta64(h, "h")
    lines = ["timestamp,target_timestamp,prediction"]
    lines += [f"{format_timestamp(a)},{format_timestamp(b)},{fmt(v)}" for a, b, v in zip(ts, target, pred)]
    out = Path(args.out) if args.out else cfg.out_dir / f"predictions_{Path(args.artifact).stem}.csv"
    atomic_write_text(out, "\n".join(lines) + "\n")
    print(f"wrote {out}: {len(pred)} predictions")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, args) -> int:
    if args.artifact:
        paths = [Path(args.artifact)]
    else:
        paths = sorted((cfg.out_dir / "models").glob("*.json"))
        if not paths:
            raise IoError(f"no artifacts under {cfg.out_dir / 'models'}")
    table = _load_table(cfg)
    reports = []
    cache = {}
    for path in paths:
        art = load_artifact(path)
        p = art.pipeline
        if args.horizon is not None and p.horizon_hours != args.horizon:
            continue
        key = (p.horizon_hours, art.lags, art.calendar, art.include_static)
        if key not in cache:
            bench = replace(cfg.benchmark(), horizons=(p.horizon_hours,), lags=art.lags,
                            calendar=art.calendar, include_static=art.include_static)
            cache[key] = horizon_datasets(table, bench)[p.horizon_hours][1]
        test = cache[key]
        if test.feature_names != p.feature_names:
            raise SchemaError(f"{path.name}: feature schema differs from the table's")
        reports.extend(evaluate(p, test))
    out = Path(args.out) if args.out else cfg.out_dir / "evaluation.csv"
    atomic_write_text(out, reports_to_csv(reports))
    print(reports_to_text(reports), end="")
    return EXIT_OK


def run_manifest(cfg: RunConfig, table: TimeTable) -> str:
    """What a report was produced from: split and fold mode, seeds, encodings."""
    doc = {
        "config_digest": cfg.digest,
        "seed": cfg.seed,
        "split": {"mode": cfg.split.mode, "train_fraction": cfg.split.train_fraction, "seed": cfg.split.seed},
        "folds": {"mode": cfg.folds.mode, "k": cfg.folds.k, "seed": cfg.folds.seed},
        "scoring": cfg.scoring,
        "horizons": list(cfg.horizons),
        "lags": list(cfg.lags),
        "models": {m: list(k) for m, k in cfg.models.items()},
        "categorical_codes": {c: list(v) for c, v in table.categories.items()},
        "table_rows": len(table),
        "table_span": [format_timestamp(table.timestamps[0]), format_timestamp(table.timestamps[-1])],
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def run_benchmark(cfg: RunConfig, table: TimeTable, out_dir: Path) -> list:
    """Run the grid and write reports plus plot data under ``out_dir``."""
    bench = cfg.benchmark()
    reports, pipelines = benchmark_matrix(table, bench, keep_pipelines=True)
    primary = primary_reports(reports)
    atomic_write_text(out_dir / "report.csv", reports_to_csv(primary))
    atomic_write_text(out_dir / "report_all_scales.csv", reports_to_csv(reports))
    atomic_write_text(out_dir / "report.txt", reports_to_text(reports))
    atomic_write_text(out_dir / "benchmark_errors.csv", errors_to_csv(reports))
    atomic_write_text(out_dir / "run_manifest.json", run_manifest(cfg, table))

    predictions = {}
    cell = (cfg.plot_methodology, cfg.plot_model, cfg.plot_horizon)
    if cell in pipelines:
        test = horizon_datasets(table, bench)[cfg.plot_horizon][1]
        predictions[cell] = (test, pipelines[cell].predict(test.X))
    else:
        log.warning("plot cell %s was not benchmarked; skipping the prediction series", cell)
    emit_plot_data(table, out_dir / "plots", predictions, bins=cfg.plot_bins)
    return reports


def cmd_benchmark(cfg: RunConfig, args) -> int:
    table = _load_table(cfg)
    reports = run_benchmark(cfg, table, cfg.out_dir)
    print(reports_to_text(reports), end="")
    failed = [r for r in reports if not r.ok]
    if failed:
        print(f"{len(failed)} cell(s) failed; see {cfg.out_dir / 'benchmark_errors.csv'}", file=sys.stderr)
    return EXIT_OK


def cmd_synth(cfg: RunConfig, args) -> int:
    seed = args.seed if args.seed is not None else cfg.synth_seed
    days = args.days if args.days is not None else cfg.synth_days
    table = generate_synthetic(seed, days, cfg.synth_params)
    out = Path(args.out) if args.out else cfg.out_dir
    paths = write_sources(table, out)
    write_table(out / "table.csv", table)
    print(f"wrote {', '.join(str(p) for p in paths.values())} and {out / 'table.csv'}")
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "benchmark": cmd_benchmark,
    "synth": cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="solarcast", description="Solar generation forecasting benchmarks.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML run configuration")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", help="output directory (file for predict/evaluate)")
        if name in ("train", "predict", "evaluate", "benchmark"):
            p.add_argument("--horizon", type=int, help="restrict to one horizon (hours)")
        if name in ("train", "benchmark"):
            p.add_argument("--model", help="restrict to one model kind")
            p.add_argument("--methodology", choices=METHODOLOGIES, help="restrict to one methodology")
        if name in ("predict", "evaluate"):
            p.add_argument("--artifact", help="model artifact file")
        if name == "predict":
            p.add_argument("--table", help="merged hourly table to predict from")
        if name == "synth":
            p.add_argument("--days", type=int, help="number of days to generate")
    return ap


def _configure(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    over = {}
    if args.seed is not None and args.command != "synth":
        over["seed"] = args.seed
    if args.out and args.command not in ("predict", "evaluate", "synth"):
        over["out_dir"] = Path(args.out)
    if getattr(args, "horizon", None) is not None and args.command in ("train", "benchmark"):
        over["horizons"] = (args.horizon,)
    if args.command == "benchmark" and (args.model or args.methodology):
        models = {m: tuple(k for k in ks if args.model in (None, k))
                  for m, ks in cfg.models.items() if args.methodology in (None, m)}
        over["models"] = {m: ks for m, ks in models.items() if ks}
    cfg = cfg.with_overrides(**over)
    cfg.benchmark()
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _configure(args)
        return COMMANDS[args.command](cfg, args)
    except ToolError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return exit_code(exc, args.command)
