"""Predictors and a small registry mapping model kind names to fitters."""
from __future__ import annotations

from typing import Any, Optional

import numpy as np

from ..core import ConfigError
from .boosting import SECOND_ORDER_DEFAULTS, BoostConfig, BoostedModel, fit_gbm, predict_gbm
from .ensemble import AveragingEnsemble, fit_ensemble, predict_ensemble
from .forest import ForestModel, fit_forest
from .linear import LinearModel, LogisticModel, fit_linear, fit_logistic, predict_linear
from .tree import DecisionTree, fit_tree
from .tweedie import TweedieSpec, tweedie_deviance
from .zero_inflated import (
    LogLinearModel,
    ZeroInflatedModel,
    fit_zero_inflated,
    predict_zero_inflated,
)

MODEL_KINDS = ("linear", "gbm", "xgb", "rf", "rf_xgb")
ZI_KINDS = ("gbm", "xgb", "rf", "linear")

DISPLAY_NAMES = {
    "linear": "Linear Regression",
    "gbm": "GradientBoosting Regression",
    "xgb": "XGBoost Regression",
    "rf": "RandomForest Regression",
    "rf_xgb": "RandomForest + XGBoost",
}

_PARAM_NAMES = {
    "linear": {"l2"},
    "gbm": {"n_estimators", "learning_rate", "max_depth", "min_samples_leaf", "row_subsample",
            "col_subsample", "loss", "tweedie_power"},
    "xgb": {"n_estimators", "learning_rate", "max_depth", "min_samples_leaf", "row_subsample",
            "col_subsample", "reg_lambda", "loss", "tweedie_power"},
    "rf": {"n_estimators", "max_depth", "feature_fraction", "min_samples_leaf", "bootstrap"},
    "rf_xgb": {"weights"},
    "gate": {"n_estimators", "learning_rate", "max_depth", "min_samples_leaf", "row_subsample",
             "col_subsample", "reg_lambda", "l2"},
}


def check_params(kind: str, params: dict) -> None:
    if kind not in _PARAM_NAMES:
        raise ConfigError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    unknown = set(params) - _PARAM_NAMES[kind]
    if unknown:
        raise ConfigError(f"unknown hyperparameter(s) for {kind}: {sorted(unknown)}")


def fit_model(kind: str, X, y, params: Optional[dict] = None, seed: int = 0,
              member_params: Optional[dict] = None):
    """Fit one of :data:`MODEL_KINDS` on raw-scale targets.

    ``member_params`` supplies the ``rf`` and ``xgb`` settings for ``rf_xgb``.
    """
    params = dict(params or {})
    check_params(kind, params)
    if kind == "linear":
        return fit_linear(X, y, **params)
    if kind == "gbm":
        return fit_gbm(X, y, BoostConfig(**params), seed=seed)
    if kind == "xgb":
        return fit_gbm(X, y, BoostConfig(**{**SECOND_ORDER_DEFAULTS, **params}), seed=seed)
    if kind == "rf":
        return fit_forest(X, y, seed=seed, **params)
    member_params = member_params or {}
    rf = fit_model("rf", X, y, member_params.get("rf"), seed=seed)
    xgb = fit_model("xgb", X, y, member_params.get("xgb"), seed=seed + 1)
    return fit_ensemble([rf, xgb], params.get("weights"))


def fit_zi_model(kind: str, X, y, params: Optional[dict] = None, seed: int = 0,
                 gate_kind: Optional[str] = None, gate_params: Optional[dict] = None):
    """Hurdle model whose positive part is ``kind``; linear pairs with a logistic gate."""
    if kind not in ZI_KINDS:
        raise ConfigError(f"unknown zero-inflated kind {kind!r}; expected one of {ZI_KINDS}")
    params = dict(params or {})
    check_params(kind, {k: v for k, v in params.items() if not (kind == "linear" and k == "link")})
    gate_params = dict(gate_params or {})
    check_params("gate", gate_params)
    if gate_kind is None:
        gate_kind = "logistic" if kind == "linear" else "boosted"
    # one shared "gate" section configures both gate kinds; each takes its own keys
    if gate_kind == "logistic":
        gate_params = {k: v for k, v in gate_params.items() if k == "l2"}
    else:
        gate_params = {k: v for k, v in gate_params.items() if k != "l2"}
    if kind in ("gbm", "xgb"):
        params.setdefault("loss", "tweedie")
    return fit_zero_inflated(X, y, gate_kind, kind, gate_params, params, seed)


_TYPES = {
    cls.__name__: cls
    for cls in (LinearModel, LogisticModel, DecisionTree, ForestModel, BoostedModel, LogLinearModel)
}


def model_to_dict(m: Any) -> dict:
    """Tagged, JSON-ready description of any fitted model."""
    if isinstance(m, AveragingEnsemble):
        return {"type": "AveragingEnsemble", "members": [model_to_dict(x) for x in m.members],
                "weights": m.weights.tolist()}
    if isinstance(m, ZeroInflatedModel):
        return {"type": "ZeroInflatedModel", "gate": model_to_dict(m.gate),
                "positive": model_to_dict(m.positive), "gate_kind": m.gate_kind,
                "positive_kind": m.positive_kind}
    name = type(m).__name__
    if name not in _TYPES:
        raise TypeError(f"cannot serialize {name}")
    return {"type": name, **m.to_dict()}


def model_from_dict(d: dict) -> Any:
    t = d["type"]
    if t == "AveragingEnsemble":
        return AveragingEnsemble(tuple(model_from_dict(x) for x in d["members"]),
                                 np.asarray(d["weights"], dtype=float))
    if t == "ZeroInflatedModel":
        return ZeroInflatedModel(model_from_dict(d["gate"]), model_from_dict(d["positive"]),
                                 d["gate_kind"], d["positive_kind"])
    if t not in _TYPES:
        raise ConfigError(f"unknown model type {t!r}")
    body = {k: v for k, v in d.items() if k != "type"}
    return _TYPES[t].from_dict(body)


__all__ = [
    "AveragingEnsemble", "BoostConfig", "BoostedModel", "DecisionTree", "ForestModel",
    "LinearModel", "LogLinearModel", "LogisticModel", "TweedieSpec", "ZeroInflatedModel",
    "fit_ensemble", "fit_forest", "fit_gbm", "fit_linear", "fit_logistic", "fit_model",
    "fit_tree", "fit_zero_inflated", "fit_zi_model", "model_from_dict", "model_to_dict",
    "predict_ensemble", "predict_gbm", "predict_linear", "predict_zero_inflated",
    "tweedie_deviance", "DISPLAY_NAMES", "MODEL_KINDS", "ZI_KINDS",
]
