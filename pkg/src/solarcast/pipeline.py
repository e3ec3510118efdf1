"""A fitted model together with the methodology and transforms it was trained under."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .core import ConfigError, SchemaError, SupervisedDataset
from .models import MODEL_KINDS, ZI_KINDS, fit_model, fit_zi_model
from .transform import PowerTransformer, fit_transformer

METHODOLOGIES = ("regular", "zero_inflated", "power_transform")
METHODOLOGY_TITLES = {
    "regular": "Regular time series",
    "zero_inflated": "Zero-inflated model",
    "power_transform": "Power transform",
}


def check_methodology(methodology: str, kind: str) -> None:
    if methodology not in METHODOLOGIES:
        raise ConfigError(f"unknown methodology {methodology!r}; expected one of {METHODOLOGIES}")
    allowed = ZI_KINDS if methodology == "zero_inflated" else MODEL_KINDS
    if kind not in allowed:
        raise ConfigError(f"model {kind!r} is not available for {methodology}; expected one of {allowed}")


@dataclass(frozen=True)
class Pipeline:
    methodology: str
    kind: str
    model: Any
    feature_names: tuple[str, ...]
    horizon_hours: int
    feature_transform: Optional[PowerTransformer] = None
    target_transform: Optional[PowerTransformer] = None

    def _features(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise SchemaError(f"expected {len(self.feature_names)} features, got shape {X.shape}")
        if self.feature_transform is not None:
            X = self.feature_transform.apply(X)
        return X

    def predict_model_scale(self, X) -> np.ndarray:
        """Predictions on the scale the model was fit on (transformed for power_transform)."""
        return self.model.predict(self._features(X))

    def to_raw_scale(self, pred) -> np.ndarray:
        """Invert the target transform and clip at zero generation."""
        pred = np.asarray(pred, dtype=float)
        if self.target_transform is not None:
            pred = self.target_transform.invert(pred, clip=True)
        return np.maximum(pred, 0.0)

    def predict(self, X) -> np.ndarray:
        """Raw-scale generation forecast."""
        return self.to_raw_scale(self.predict_model_scale(X))

    def transform_target(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return y if self.target_transform is None else self.target_transform.apply(y)


def fit_pipeline(methodology: str, kind: str, train: SupervisedDataset,
                 params: Optional[dict] = None, seed: int = 0,
                 member_params: Optional[dict] = None,
                 transform_features: bool = True, transform_target: bool = True,
                 gate_kind: Optional[str] = None, gate_params: Optional[dict] = None) -> Pipeline:
    """Fit ``kind`` under ``methodology`` on the training rows.

    ``power_transform`` fits Yeo-Johnson parameters on the training rows only
    and trains on the transformed data; ``zero_inflated`` trains a hurdle
    model on raw targets; ``regular`` trains directly on raw values.
    """
    check_methodology(methodology, kind)
    X, y = train.X, train.y
    ft = tt = None
    if methodology == "power_transform":
        if transform_features:
            ft = fit_transformer(X)
            X = ft.apply(X)
        if transform_target:
            tt = fit_transformer(y)
            y = tt.apply(y)
    if methodology == "zero_inflated":
        model = fit_zi_model(kind, X, y, params, seed=seed, gate_kind=gate_kind, gate_params=gate_params)
    else:
        model = fit_model(kind, X, y, params, seed=seed, member_params=member_params)
    return Pipeline(methodology, kind, model, train.feature_names, train.horizon_hours, ft, tt)
