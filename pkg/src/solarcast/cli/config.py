"""Run configuration: a TOML file with one table per stage and strict keys."""
from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from ..core import DEFAULT_GENERATION_MAX, HORIZONS, ConfigError
from ..eval.benchmark import FULL_GRID_MODELS, BenchmarkConfig
from ..eval.metrics import SCORERS
from ..features import FoldPlan, SplitSpec
from ..ingest import DEFAULT_STALENESS_HOURS
from ..models import check_params
from ..pipeline import METHODOLOGIES, check_methodology
from .synthetic import SynthParams

# section -> allowed keys (None: free-form sub-tables, validated separately)
_SECTIONS = {
    "run": {"seed", "out"},
    "data": {"solar", "weather", "aqi", "table", "agg", "staleness_hours", "generation_max"},
    "features": {"horizons", "lags", "calendar", "include_static"},
    "split": {"train_fraction", "mode", "seed"},
    "cv": {"k", "mode", "seed", "scoring"},
    "models": set(METHODOLOGIES) | {"transform_features", "transform_target"},
    "params": None,
    "grid": None,
    "plots": {"methodology", "model", "horizon", "bins"},
    "synth": {"seed", "n_days", "params"},
}


def config_digest(raw: dict) -> str:
    """SHA-256 of the config content; independent of key order in the file."""
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    out_dir: Path = Path("out")
    solar: Optional[Path] = None
    weather: Optional[Path] = None
    aqi: Optional[Path] = None
    table: Optional[Path] = None
    agg: str = "sum"
    staleness_hours: float = DEFAULT_STALENESS_HOURS
    generation_max: float = DEFAULT_GENERATION_MAX
    horizons: tuple[int, ...] = HORIZONS
    lags: tuple[int, ...] = (0,)
    calendar: bool = True
    include_static: bool = False
    split: SplitSpec = field(default_factory=SplitSpec)
    folds: FoldPlan = field(default_factory=FoldPlan)
    scoring: str = "r2"
    models: dict = field(default_factory=lambda: dict(FULL_GRID_MODELS))
    transform_features: bool = True
    transform_target: bool = True
    params: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict)
    plot_methodology: str = "power_transform"
    plot_model: str = "rf"
    plot_horizon: int = 24
    plot_bins: int = 40
    synth_seed: int = 0
    synth_days: int = 730
    synth_params: SynthParams = field(default_factory=SynthParams)
    digest: str = ""

    @property
    def table_path(self) -> Path:
        """Merged table: the configured path, else ``<out>/table.csv``."""
        return self.table if self.table is not None else self.out_dir / "table.csv"

    def benchmark(self) -> BenchmarkConfig:
        return BenchmarkConfig(
            models=self.models, horizons=self.horizons, lags=self.lags, calendar=self.calendar,
            include_static=self.include_static, split=self.split, folds=self.folds,
            params=self.params, grids=self.grids, scoring=self.scoring,
            transform_features=self.transform_features, transform_target=self.transform_target,
            seed=self.seed,
        )

    def with_overrides(self, **kw) -> "RunConfig":
        d = dict(self.__dict__)
        d.update({k: v for k, v in kw.items() if v is not None})
        return RunConfig(**d)


def _typed(section: str, key: str, value, kind):
    ok = isinstance(value, kind) and not (kind in (int, (int, float)) and isinstance(value, bool))
    if not ok:
        raise ConfigError(f"[{section}] {key} has the wrong type: {value!r}")
    return value


def _int_list(section, key, value) -> tuple[int, ...]:
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise ConfigError(f"[{section}] {key} must be a list of integers")
    return tuple(value)


def parse_config(raw: dict, base_dir: Path = Path(".")) -> RunConfig:
    """Validate a parsed TOML document. Relative paths resolve against ``base_dir``."""
    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
    for sec, keys in _SECTIONS.items():
        body = raw.get(sec, {})
        if not isinstance(body, dict):
            raise ConfigError(f"[{sec}] must be a table")
        if keys is not None and set(body) - keys:
            raise ConfigError(f"unknown key(s) in [{sec}]: {sorted(set(body) - keys)}")

    kw: dict = {"digest": config_digest(raw)}
    run, data, feat = raw.get("run", {}), raw.get("data", {}), raw.get("features", {})

    def path(v, key):
        _typed("data", key, v, str)
        return (base_dir / v) if not Path(v).is_absolute() else Path(v)

    if "seed" in run:
        kw["seed"] = _typed("run", "seed", run["seed"], int)
    if "out" in run:
        kw["out_dir"] = base_dir / _typed("run", "out", run["out"], str)
    for key in ("solar", "weather", "aqi", "table"):
        if key in data:
            kw[key] = path(data[key], key)
    if "agg" in data:
        kw["agg"] = _typed("data", "agg", data["agg"], str)
        if kw["agg"] not in ("sum", "mean"):
            raise ConfigError(f"[data] agg must be 'sum' or 'mean', got {kw['agg']!r}")
    for key in ("staleness_hours", "generation_max"):
        if key in data:
            kw[key] = float(_typed("data", key, data[key], (int, float)))

    if "horizons" in feat:
        kw["horizons"] = _int_list("features", "horizons", feat["horizons"])
        if not kw["horizons"] or set(kw["horizons"]) - set(HORIZONS):
            raise ConfigError(f"[features] horizons must be a non-empty subset of {HORIZONS}")
    if "lags" in feat:
        kw["lags"] = _int_list("features", "lags", feat["lags"])
    for key in ("calendar", "include_static"):
        if key in feat:
            kw[key] = _typed("features", key, feat[key], bool)

    try:
        kw["split"] = SplitSpec(**raw.get("split", {}))
        cv = dict(raw.get("cv", {}))
        if "scoring" in cv:
            kw["scoring"] = cv.pop("scoring")
            if kw["scoring"] not in SCORERS:
                raise ConfigError(f"[cv] scoring must be one of {sorted(SCORERS)}")
        kw["folds"] = FoldPlan(**cv)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc

    models = raw.get("models", {})
    if any(m in models for m in METHODOLOGIES):
        kw["models"] = {}
        for meth in METHODOLOGIES:
            kinds = models.get(meth, [])
            if not isinstance(kinds, list) or not all(isinstance(k, str) for k in kinds):
                raise ConfigError(f"[models] {meth} must be a list of model names")
            for k in kinds:
                check_methodology(meth, k)
            if kinds:
                kw["models"][meth] = tuple(kinds)
    for key in ("transform_features", "transform_target"):
        if key in models:
            kw[key] = _typed("models", key, models[key], bool)

    params = raw.get("params", {})
    for kind, p in params.items():
        if not isinstance(p, dict):
            raise ConfigError(f"[params.{kind}] must be a table")
        check_params(kind, p)
    kw["params"] = {k: dict(v) for k, v in params.items()}
    grids = raw.get("grid", {})
    for kind, g in grids.items():
        if not isinstance(g, dict) or not all(isinstance(v, list) and v for v in g.values()):
            raise ConfigError(f"[grid.{kind}] must map hyperparameters to non-empty value lists")
        check_params(kind, g)
    kw["grids"] = {k: dict(v) for k, v in grids.items()}

    plots = raw.get("plots", {})
    if "methodology" in plots:
        kw["plot_methodology"] = _typed("plots", "methodology", plots["methodology"], str)
    if "model" in plots:
        kw["plot_model"] = _typed("plots", "model", plots["model"], str)
    if "horizon" in plots:
        kw["plot_horizon"] = _typed("plots", "horizon", plots["horizon"], int)
    if "bins" in plots:
        kw["plot_bins"] = _typed("plots", "bins", plots["bins"], int)
        if kw["plot_bins"] < 1:
            raise ConfigError("[plots] bins must be positive")

    synth = raw.get("synth", {})
    if "seed" in synth:
        kw["synth_seed"] = _typed("synth", "seed", synth["seed"], int)
    if "n_days" in synth:
        kw["synth_days"] = _typed("synth", "n_days", synth["n_days"], int)
    if "params" in synth:
        kw["synth_params"] = SynthParams.from_dict(_typed("synth", "params", synth["params"], dict))

    cfg = RunConfig(**kw)
    cfg.benchmark()  # cross-field validation
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}", path=str(path)) from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", path=str(path)) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}", path=str(path)) from exc
    return parse_config(raw, path.parent)
