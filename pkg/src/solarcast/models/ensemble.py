"""Weighted averaging of fitted regressors."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import ConfigError


@dataclass(frozen=True)
class AveragingEnsemble:
    members: tuple
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.members),):
            raise ConfigError(f"{len(self.members)} members but {w.size} weights")
        if (w < 0).any() or abs(w.sum() - 1.0) > 1e-12:
            raise ConfigError(f"ensemble weights must be non-negative and sum to 1, got {w.tolist()}")
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "weights", w)

    def predict(self, X) -> np.ndarray:
        out = 0.0
        for w, m in zip(self.weights, self.members):
            out = out + w * m.predict(X)
        return np.asarray(out, dtype=float)


def fit_ensemble(members: Sequence, weights: Sequence[float] | None = None) -> AveragingEnsemble:
    """Combine already-fitted members; equal weights by default."""
    if weights is None:
        weights = np.full(len(members), 1.0 / len(members))
    return AveragingEnsemble(tuple(members), np.asarray(weights, dtype=float))


def predict_ensemble(e: AveragingEnsemble, X) -> np.ndarray:
    return e.predict(X)
