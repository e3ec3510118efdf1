"""Bagged regression trees with per-split feature subsampling."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import ConfigError
from .tree import DecisionTree, fit_tree, presort


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[DecisionTree, ...]
    tree_seeds: tuple[int, ...]
    feature_fraction: float
    bootstrap: bool = True

    @property
    def n_estimators(self) -> int:
        return len(self.trees)

    def predict(self, X) -> np.ndarray:
        """Unweighted mean of the trees' predictions."""
        X = np.asarray(X, dtype=float)
        return np.mean(np.stack([t.predict(X) for t in self.trees]), axis=0)

    def to_dict(self) -> dict:
        return {
            "trees": [t.to_dict() for t in self.trees],
            "tree_seeds": list(self.tree_seeds),
            "feature_fraction": self.feature_fraction,
            "bootstrap": self.bootstrap,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls(tuple(DecisionTree.from_dict(t) for t in d["trees"]), tuple(d["tree_seeds"]),
                   float(d["feature_fraction"]), bool(d["bootstrap"]))


def fit_forest(X, y, n_estimators: int = 50, max_depth: Optional[int] = 20,
               feature_fraction: float = 1 / 3, seed: int = 0, min_samples_leaf: int = 1,
               bootstrap: bool = True) -> ForestModel:
    """Random forest regressor.

    Tree ``j`` draws ``n`` rows with replacement using its own seed (spawned
    from ``seed``) and considers ``round(feature_fraction * d)`` random
    features at every split.
    """
    if n_estimators < 1:
        raise ConfigError(f"a forest needs at least one tree, got {n_estimators}")
    if not 0.0 < feature_fraction <= 1.0:
        raise ConfigError(f"feature_fraction must lie in (0, 1], got {feature_fraction}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    max_features = max(1, int(round(feature_fraction * d)))
    if max_features >= d:
        max_features = None
    seeds = np.random.SeedSequence(seed).generate_state(n_estimators, dtype=np.uint32)
    order = presort(X)
    trees = []
    for s in seeds:
        rng = np.random.default_rng(int(s))
        if bootstrap:
            counts = np.bincount(rng.integers(0, n, n), minlength=n).astype(float)
        else:
            counts = np.ones(n)
        trees.append(fit_tree(X, y, weights=counts, max_depth=max_depth,
                              min_samples_leaf=min_samples_leaf, max_features=max_features,
                              rng=rng, order=order))
    return ForestModel(tuple(trees), tuple(int(s) for s in seeds), float(feature_fraction), bootstrap)
