"""Two-part (hurdle) model: a zero gate plus a model of the positive part.

The gate estimates ``pi(x) = P(y == 0 | x)`` from every row; the positive
model estimates ``mu(x) = E[y | y > 0, x]`` from the positive rows only. The
expectation is ``(1 - pi(x)) * mu(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from ..core import ConfigError, EmptySplitError
from .boosting import SECOND_ORDER_DEFAULTS, BoostConfig, BoostedModel, fit_gbm
from .forest import ForestModel, fit_forest
from .linear import LinearModel, fit_linear, fit_logistic

GATE_KINDS = ("logistic", "boosted")
POSITIVE_KINDS = ("gbm", "xgb", "rf", "linear")
# night hours make zero vs positive almost separable; a light ridge keeps the gate finite
GATE_L2 = 1.0
# the boosted gate only has to separate zero from positive; keep it shallow and leafy
BOOSTED_GATE_DEFAULTS = {**SECOND_ORDER_DEFAULTS, "max_depth": 4, "min_samples_leaf": 20}


@dataclass(frozen=True)
class LogLinearModel:
    """Linear model of ``log(y)`` mapped back with Duan's smearing factor."""

    linear: LinearModel
    smearing: float

    def predict(self, X) -> np.ndarray:
        return np.exp(self.linear.predict(X)) * self.smearing

    def to_dict(self) -> dict:
        return {"linear": self.linear.to_dict(), "smearing": self.smearing}

    @classmethod
    def from_dict(cls, d: dict) -> "LogLinearModel":
        return cls(LinearModel.from_dict(d["linear"]), float(d["smearing"]))


def fit_log_linear(X, y, l2: float = 0.0) -> LogLinearModel:
    y = np.asarray(y, dtype=float)
    if (y <= 0).any():
        raise ValueError("log-linear fit needs strictly positive targets")
    lin = fit_linear(X, np.log(y), l2=l2)
    resid = np.log(y) - lin.predict(X)
    return LogLinearModel(lin, float(np.mean(np.exp(resid))))


@dataclass(frozen=True)
class ZeroInflatedModel:
    gate: Any  # LogisticModel | BoostedModel with logistic loss
    positive: Any  # BoostedModel | ForestModel | LogLinearModel | LinearModel
    gate_kind: str
    positive_kind: str

    def zero_probability(self, X) -> np.ndarray:
        return self.gate.predict_proba(X)

    def positive_mean(self, X) -> np.ndarray:
        return np.maximum(self.positive.predict(X), 0.0)

    def predict(self, X) -> np.ndarray:
        """``E[y | x] = (1 - pi(x)) * mu(x)``."""
        return (1.0 - self.zero_probability(X)) * self.positive_mean(X)


def _fit_positive(kind: str, X, y, params: dict, seed: int):
    if kind == "gbm":
        cfg = BoostConfig(**{"loss": "tweedie", **params})
        return fit_gbm(X, y, cfg, seed=seed)
    if kind == "xgb":
        cfg = BoostConfig(**{**SECOND_ORDER_DEFAULTS, "loss": "tweedie", **params})
        return fit_gbm(X, y, cfg, seed=seed)
    if kind == "rf":
        return fit_forest(X, y, seed=seed, **params)
    if kind == "linear":
        params = dict(params)
        link = params.pop("link", "log")
        if link == "log":
            return fit_log_linear(X, y, **params)
        if link == "identity":
            return fit_linear(X, y, **params)
        raise ConfigError(f"linear positive part link must be 'log' or 'identity', got {link!r}")
    raise ConfigError(f"unknown positive-part kind {kind!r}; expected one of {POSITIVE_KINDS}")


def _fit_gate(kind: str, X, z, params: dict, seed: int):
    if kind == "logistic":
        extra = set(params) - {"l2"}
        if extra:
            raise ConfigError(f"logistic gate takes only 'l2', got {sorted(extra)}")
        return fit_logistic(X, z, l2=params.get("l2", GATE_L2))
    if kind == "boosted":
        if "l2" in params:
            raise ConfigError("'l2' applies to the logistic gate only")
        cfg = BoostConfig(**{**BOOSTED_GATE_DEFAULTS, **params, "loss": "logistic"})
        return fit_gbm(X, z, cfg, seed=seed)
    raise ConfigError(f"unknown gate kind {kind!r}; expected one of {GATE_KINDS}")


def fit_zero_inflated(X, y, gate_kind: str = "boosted", positive_kind: str = "gbm",
                      gate_params: Optional[dict] = None, positive_params: Optional[dict] = None,
                      seed: int = 0) -> ZeroInflatedModel:
    """Fit the gate on ``1{y == 0}`` over all rows and the positive part on ``y > 0``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if (y < 0).any():
        raise ValueError("zero-inflated targets must be non-negative")
    zero = y == 0
    if not zero.any():
        raise EmptySplitError("zero-inflated model needs at least one zero target")
    if zero.all():
        raise EmptySplitError("zero-inflated model needs at least one positive target")
    gate = _fit_gate(gate_kind, X, zero.astype(float), dict(gate_params or {}), seed)
    positive = _fit_positive(positive_kind, X[~zero], y[~zero], dict(positive_params or {}), seed + 1)
    return ZeroInflatedModel(gate, positive, gate_kind, positive_kind)


def predict_zero_inflated(m: ZeroInflatedModel, X) -> np.ndarray:
    return m.predict(X)
