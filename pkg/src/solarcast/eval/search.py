"""Cross-validation and exhaustive grid search over hyperparameters."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..core import ConfigError, SupervisedDataset
from ..features import FoldPlan, make_cv_folds
from ..models import check_params
from ..pipeline import fit_pipeline
from .metrics import SCORERS


@dataclass(frozen=True)
class GridSpec:
    grid: dict
    scoring: str = "r2"
    folds: FoldPlan = field(default_factory=FoldPlan)

    def __post_init__(self):
        if not self.grid or any(len(v) == 0 for v in self.grid.values()):
            raise ConfigError("grid must name at least one hyperparameter with at least one value")
        if self.scoring not in SCORERS:
            raise ConfigError(f"unknown scoring {self.scoring!r}; expected one of {sorted(SCORERS)}")

    def points(self) -> list[dict]:
        """Cartesian product in declaration order (last key varies fastest)."""
        keys = list(self.grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.grid[k] for k in keys))]


@dataclass(frozen=True)
class CVResult:
    scores: tuple[float, ...]
    scoring: str

    @property
    def mean(self) -> float:
        return float(np.mean(self.scores))

    @property
    def sd(self) -> float:
        return float(np.std(self.scores))


def _score(pipeline, ds: SupervisedDataset, scoring: str) -> float:
    fn, _ = SCORERS[scoring]
    return fn(pipeline.transform_target(ds.y), pipeline.predict_model_scale(ds.X))


def cross_validate(kind: str, params: Optional[dict], train: SupervisedDataset,
                   plan: FoldPlan = FoldPlan(), methodology: str = "regular", seed: int = 0,
                   scoring: str = "r2", folds: Optional[Sequence] = None, **fit_kwargs) -> CVResult:
    """Fit on each fold's complement and score its validation block.

    Scores are computed on the scale the model is trained on. ``folds`` may
    override the plan with explicit (fit, validate) index pairs.
    """
    if scoring not in SCORERS:
        raise ConfigError(f"unknown scoring {scoring!r}")
    if folds is None:
        folds = make_cv_folds(train, plan)
    scores = []
    for fit_idx, val_idx in folds:
        p = fit_pipeline(methodology, kind, train.subset(fit_idx), params, seed=seed, **fit_kwargs)
        scores.append(_score(p, train.subset(val_idx), scoring))
    return CVResult(tuple(scores), scoring)


@dataclass(frozen=True)
class GridResult:
    best_params: dict
    best_score: float
    # one row per (grid point, fold): (point index, params, fold, score)
    table: tuple[tuple[int, dict, int, float], ...]
    mean_scores: tuple[float, ...]


def grid_search(kind: str, spec: GridSpec, train: SupervisedDataset, base_params: Optional[dict] = None,
                methodology: str = "regular", seed: int = 0, **fit_kwargs) -> GridResult:
    """Evaluate every grid point by cross-validation and keep the best mean score.

    Lower-is-better metrics (MAE, RMSE) are compared negated; ties keep the
    earliest grid point.
    """
    _, higher_better = SCORERS[spec.scoring]
    folds = make_cv_folds(train, spec.folds)
    rows = []
    means = []
    best_i, best_key = -1, -np.inf
    for i, point in enumerate(spec.points()):
        params = {**(base_params or {}), **point}
        check_params(kind, params)
        cv = cross_validate(kind, params, train, methodology=methodology, seed=seed,
                            scoring=spec.scoring, folds=folds, **fit_kwargs)
        rows.extend((i, point, f, s) for f, s in enumerate(cv.scores))
        means.append(cv.mean)
        key = cv.mean if higher_better else -cv.mean
        if key > best_key:
            best_i, best_key = i, key
    return GridResult(spec.points()[best_i], means[best_i], tuple(rows), tuple(means))
