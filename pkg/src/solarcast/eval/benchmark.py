"""The methodology x model x horizon benchmark grid and its report files."""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .._io import fmt
from ..core import HORIZONS, ConfigError, SupervisedDataset, TimeTable, ToolError
from ..features import FoldPlan, SplitSpec, make_supervised, split
from ..models import DISPLAY_NAMES, MODEL_KINDS, ZI_KINDS
from ..pipeline import METHODOLOGIES, METHODOLOGY_TITLES, Pipeline, check_methodology, fit_pipeline
from .evaluation import EvalReport, evaluate
from .search import GridSpec, grid_search

log = logging.getLogger(__name__)

FULL_GRID_MODELS = {
    "regular": ("linear", "gbm", "xgb", "rf", "rf_xgb"),
    "zero_inflated": ("gbm", "xgb", "rf", "linear"),
    "power_transform": ("linear", "gbm", "xgb", "rf", "rf_xgb"),
}

REPORT_HEADER = "methodology,model,hours_out,scale,r2,mae,rmse"


@dataclass(frozen=True)
class BenchmarkConfig:
    models: dict = field(default_factory=lambda: dict(FULL_GRID_MODELS))
    horizons: tuple[int, ...] = HORIZONS
    lags: tuple[int, ...] = (0,)
    calendar: bool = True
    include_static: bool = False
    split: SplitSpec = field(default_factory=SplitSpec)
    folds: FoldPlan = field(default_factory=FoldPlan)
    params: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict)
    scoring: str = "r2"
    transform_features: bool = True
    transform_target: bool = True
    seed: int = 0

    def __post_init__(self):
        if not self.horizons:
            raise ConfigError("at least one horizon is required")
        for h in self.horizons:
            if h not in HORIZONS:
                raise ConfigError(f"horizon must be one of {HORIZONS}, got {h}")
        for meth, kinds in self.models.items():
            for k in kinds:
                check_methodology(meth, k)

    def cells(self) -> list[tuple[str, str, int]]:
        return [(m, k, h) for m in METHODOLOGIES for k in self.models.get(m, ()) for h in self.horizons]


def cell_seed(master: int, methodology: str, model: str, horizon: int) -> int:
    """First 4 bytes (big-endian) of SHA-256 over ``"master|methodology|model|horizon"``."""
    digest = hashlib.sha256(f"{master}|{methodology}|{model}|{horizon}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


def _sort_key(r: EvalReport):
    kinds = ZI_KINDS if r.methodology == "zero_inflated" else MODEL_KINDS
    scale_order = ("raw", "transformed", "inverse_transformed")
    return (METHODOLOGIES.index(r.methodology), kinds.index(r.model), r.horizon_hours,
            scale_order.index(r.scale))


def _fit_kwargs(cfg: BenchmarkConfig) -> dict:
    return dict(
        member_params={"rf": cfg.params.get("rf"), "xgb": cfg.params.get("xgb")},
        transform_features=cfg.transform_features,
        transform_target=cfg.transform_target,
        gate_params=cfg.params.get("gate"),
    )


def fit_cell(cfg: BenchmarkConfig, methodology: str, kind: str, train: SupervisedDataset,
             seed: int) -> Pipeline:
    """Fit one benchmark cell, grid-searching first when a grid is configured for ``kind``."""
    params = dict(cfg.params.get(kind) or {})
    if kind in cfg.grids:
        spec = GridSpec(cfg.grids[kind], cfg.scoring, cfg.folds)
        res = grid_search(kind, spec, train, params, methodology=methodology, seed=seed, **_fit_kwargs(cfg))
        log.info("%s/%s: grid best %s (cv %s=%.4f)", methodology, kind, res.best_params, cfg.scoring,
                 res.best_score)
        params.update(res.best_params)
    return fit_pipeline(methodology, kind, train, params, seed=seed, **_fit_kwargs(cfg))


def horizon_datasets(table: TimeTable, cfg: BenchmarkConfig) -> dict:
    out = {}
    for h in cfg.horizons:
        ds = make_supervised(table, h, cfg.lags, calendar=cfg.calendar, include_static=cfg.include_static)
        out[h] = split(ds, cfg.split)
    return out


def benchmark_matrix(table: TimeTable, cfg: BenchmarkConfig, keep_pipelines: bool = False):
    """Run every configured (methodology, model, horizon) cell.

    Returns the reports sorted by methodology, model, horizon and scale; a
    failing cell yields NaN metrics with its error message attached instead of
    aborting the run. With ``keep_pipelines`` the fitted pipelines come back
    too, keyed by cell.
    """
    data = horizon_datasets(table, cfg)
    reports: list[EvalReport] = []
    pipelines = {}
    for meth, kind, h in cfg.cells():
        train, test = data[h]
        try:
            p = fit_cell(cfg, meth, kind, train, cell_seed(cfg.seed, meth, kind, h))
            reports.extend(evaluate(p, test))
            if keep_pipelines:
                pipelines[(meth, kind, h)] = p
        except (ToolError, ValueError, np.linalg.LinAlgError) as exc:
            log.warning("cell %s/%s/%dh failed: %s", meth, kind, h, exc)
            scale = "transformed" if meth == "power_transform" and cfg.transform_target else "raw"
            reports.append(EvalReport.failed(kind, meth, h, scale, f"{type(exc).__name__}: {exc}"))
    reports.sort(key=_sort_key)
    return (reports, pipelines) if keep_pipelines else reports


def primary_reports(reports: list[EvalReport]) -> list[EvalReport]:
    """One report per cell: the scale each methodology's table is quoted in."""
    return [r for r in reports if r.scale != "inverse_transformed"]


def reports_to_csv(reports: list[EvalReport]) -> str:
    lines = [REPORT_HEADER]
    for r in reports:
        lines.append(",".join([r.methodology, r.model, str(r.horizon_hours), r.scale,
                               fmt(r.r2), fmt(r.mae), fmt(r.rmse)]))
    return "\n".join(lines) + "\n"


def errors_to_csv(reports: list[EvalReport]) -> str:
    lines = ["methodology,model,hours_out,error"]
    for r in reports:
        if not r.ok:
            msg = r.error.replace('"', "'").replace("\n", " ")
            lines.append(f'{r.methodology},{r.model},{r.horizon_hours},"{msg}"')
    return "\n".join(lines) + "\n"


def parse_report_csv(text: str) -> list[EvalReport]:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != REPORT_HEADER:
        raise ConfigError("not a benchmark report")
    out = []
    for line in lines[1:]:
        meth, model, h, scale, a, b, c = line.split(",")
        out.append(EvalReport(model, meth, int(h), scale, float(a), float(b), float(c)))
    return out


def reports_to_text(reports: list[EvalReport]) -> str:
    """Aligned tables, one block per methodology and scale."""
    blocks = []
    groups: dict[tuple[str, str], list[EvalReport]] = {}
    for r in reports:
        groups.setdefault((r.methodology, r.scale), []).append(r)
    width = max([len(DISPLAY_NAMES[k]) for k in DISPLAY_NAMES] + [len("Models")])
    for (meth, scale), rows in groups.items():
        title = f"{METHODOLOGY_TITLES[meth]} (scale: {scale})"
        head = f"{'Models':<{width}}  Hours Out  R2 Score      MAE       RMSE"
        lines = [title, "=" * len(head), head, "-" * len(head)]
        last = None
        for r in rows:
            name = DISPLAY_NAMES[r.model] if r.model != last else ""
            last = r.model
            if r.ok:
                lines.append(f"{name:<{width}}  {r.horizon_hours:>9}  {r.r2:>8.4f}  {r.mae:>9.4f}  {r.rmse:>9.4f}")
            else:
                lines.append(f"{name:<{width}}  {r.horizon_hours:>9}  failed: {r.error}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
