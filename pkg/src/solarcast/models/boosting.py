"""Gradient boosting over regression trees.

``order="first"`` fits each stage's tree to the negative gradient and then
re-solves every leaf by line search; ``order="second"`` grows the tree
directly on gradient/hessian sums with an L2 leaf penalty and per-stage row
and column subsampling. Both predict ``init + sum(stage_weight * tree(x))`` on
the raw score scale, mapped through the loss's inverse link.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import ConfigError, ConvergenceFailure, EmptySplitError, NonFiniteError
from . import tweedie
from .linear import _sigmoid
from .tree import DecisionTree, fit_tree, grow_tree, presort

LOSSES = ("squared", "tweedie", "logistic")
# bound on a single line-search leaf step in the raw score
_MAX_LEAF_STEP = 10.0


@dataclass(frozen=True)
class BoostConfig:
    n_estimators: int = 50
    learning_rate: float = 0.1
    max_depth: Optional[int] = 5
    min_samples_leaf: int = 10
    loss: str = "squared"
    tweedie_power: float = tweedie.DEFAULT_POWER
    order: str = "first"
    row_subsample: float = 1.0
    col_subsample: float = 1.0
    reg_lambda: float = 0.0

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise ConfigError(f"unknown loss {self.loss!r}")
        if self.order not in ("first", "second"):
            raise ConfigError(f"order must be 'first' or 'second', got {self.order!r}")
        if self.n_estimators < 0:
            raise ConfigError("n_estimators must be >= 0")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ConfigError(f"learning_rate must lie in (0, 1], got {self.learning_rate}")
        for name in ("row_subsample", "col_subsample"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"{name} must lie in (0, 1], got {v}")
        if self.reg_lambda < 0:
            raise ConfigError("reg_lambda must be >= 0")
        if self.loss == "tweedie":
            tweedie.TweedieSpec(self.tweedie_power)


# second-order defaults: row/column subsample 0.8, leaf L2 1.0, depth 6
SECOND_ORDER_DEFAULTS = dict(
    order="second", learning_rate=0.3, max_depth=6, min_samples_leaf=1,
    row_subsample=0.8, col_subsample=0.8, reg_lambda=1.0,
)


def _loss_value(loss: str, y: np.ndarray, F: np.ndarray, p: float) -> float:
    if loss == "squared":
        return float(np.mean((y - F) ** 2))
    if loss == "tweedie":
        return float(np.mean(tweedie.tweedie_deviance(y, np.exp(F), p)))
    prob = np.clip(_sigmoid(F), 1e-15, 1 - 1e-15)
    return float(-np.mean(y * np.log(prob) + (1 - y) * np.log1p(-prob)))


def _grad_hess(loss: str, y: np.ndarray, F: np.ndarray, p: float) -> tuple[np.ndarray, np.ndarray]:
    if loss == "squared":
        return F - y, np.ones_like(F)
    if loss == "tweedie":
        return tweedie.gradient(y, F, p), tweedie.hessian(y, F, p)
    prob = _sigmoid(F)
    return prob - y, prob * (1 - prob)


def _initial_score(loss: str, y: np.ndarray) -> float:
    m = float(np.mean(y))
    if loss == "squared":
        return m
    if loss == "tweedie":
        if m <= 0:
            raise EmptySplitError("tweedie loss needs a positive mean target")
        return float(np.log(m))
    if m <= 0 or m >= 1:
        raise EmptySplitError("logistic loss needs both classes present")
    return float(np.log(m / (1 - m)))


def _line_search(loss: str, y: np.ndarray, F: np.ndarray, leaf: np.ndarray, n_nodes: int,
                 p: float, fallback: np.ndarray) -> np.ndarray:
    """Per-leaf optimal raw-score step given the current scores ``F``."""
    if loss == "squared":
        return fallback
    if loss == "tweedie":
        # argmin_g sum half-deviance(y, F+g) = log(sum y e^{(1-p)F} / sum e^{(2-p)F})
        a = np.bincount(leaf, weights=y * np.exp((1 - p) * F), minlength=n_nodes)
        b = np.bincount(leaf, weights=np.exp((2 - p) * F), minlength=n_nodes)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.log(a / b)
    else:
        prob = _sigmoid(F)
        num = np.bincount(leaf, weights=y - prob, minlength=n_nodes)
        den = np.bincount(leaf, weights=prob * (1 - prob), minlength=n_nodes)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = num / den
    step = np.where(np.isnan(step), 0.0, step)
    return np.clip(step, -_MAX_LEAF_STEP, _MAX_LEAF_STEP)


@dataclass(frozen=True)
class BoostedModel:
    init: float
    trees: tuple[DecisionTree, ...]
    stage_weights: np.ndarray
    config: BoostConfig
    train_loss: tuple[float, ...] = ()
    dispersion: float = float("nan")

    @property
    def n_stages(self) -> int:
        return len(self.trees)

    def raw_score(self, X) -> np.ndarray:
        """``init + sum_k stage_weight_k * tree_k(X)``."""
        X = np.asarray(X, dtype=float)
        F = np.full(X.shape[0], self.init)
        for w, t in zip(self.stage_weights, self.trees):
            F = F + w * t.predict(X)
        return F

    def predict(self, X) -> np.ndarray:
        F = self.raw_score(X)
        if self.config.loss == "squared":
            out = F
        elif self.config.loss == "tweedie":
            with np.errstate(over="ignore"):
                out = np.exp(F)
        else:
            out = _sigmoid(F)
        if not np.isfinite(out).all():
            raise NonFiniteError("boosted prediction is non-finite")
        return out

    def predict_proba(self, X) -> np.ndarray:
        if self.config.loss != "logistic":
            raise ValueError("predict_proba needs a logistic-loss model")
        return self.predict(X)

    def to_dict(self) -> dict:
        return {
            "init": self.init,
            "trees": [t.to_dict() for t in self.trees],
            "stage_weights": self.stage_weights.tolist(),
            "config": dict(self.config.__dict__),
            "train_loss": list(self.train_loss),
            "dispersion": self.dispersion,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoostedModel":
        return cls(
            float(d["init"]),
            tuple(DecisionTree.from_dict(t) for t in d["trees"]),
            np.asarray(d["stage_weights"], dtype=float),
            BoostConfig(**d["config"]),
            tuple(d["train_loss"]),
            float("nan") if d.get("dispersion") is None else float(d["dispersion"]),
        )


def fit_gbm(X, y, config: BoostConfig = BoostConfig(), seed: int = 0) -> BoostedModel:
    """Fit a boosted ensemble; see the module docstring for the two modes.

    ``train_loss[k]`` is the full-sample training loss after ``k`` stages
    (mean squared error, mean Tweedie deviance or mean log-loss).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    cfg = config
    p = cfg.tweedie_power
    if cfg.loss == "tweedie" and (y < 0).any():
        raise ValueError("tweedie loss needs y >= 0")
    n, d = X.shape
    rng = np.random.default_rng(seed)
    order = presort(X)

    init = _initial_score(cfg.loss, y)
    F = np.full(n, init)
    trees: list[DecisionTree] = []
    losses = [_loss_value(cfg.loss, y, F, p)]
    n_rows = max(1, int(round(cfg.row_subsample * n)))
    n_cols = max(1, int(round(cfg.col_subsample * d)))
    for k in range(cfg.n_estimators):
        counts = np.ones(n)
        if n_rows < n:
            counts = np.zeros(n)
            counts[rng.choice(n, n_rows, replace=False)] = 1.0
        mask = None
        if n_cols < d:
            mask = np.zeros(d, dtype=bool)
            mask[rng.choice(d, n_cols, replace=False)] = True
        grad, hess = _grad_hess(cfg.loss, y, F, p)

        if cfg.order == "first":
            tree = fit_tree(X, -grad, weights=counts, max_depth=cfg.max_depth,
                            min_samples_leaf=cfg.min_samples_leaf, feature_mask=mask, order=order)
            leaf = tree.apply(X)
            inbag = counts > 0
            steps = _line_search(cfg.loss, y[inbag], F[inbag], leaf[inbag], tree.n_nodes, p, tree.value)
            tree = DecisionTree(tree.feature, tree.threshold, tree.left, tree.right,
                                np.where(tree.feature < 0, steps, tree.value), tree.max_depth,
                                tree.min_samples_leaf)
        else:
            tree = grow_tree(X, -grad * counts, hess * counts, counts=counts, reg=cfg.reg_lambda,
                             max_depth=cfg.max_depth, min_samples_leaf=cfg.min_samples_leaf,
                             feature_mask=mask, order=order)
            leaf = tree.apply(X)
        F = F + cfg.learning_rate * tree.value[leaf]
        loss = _loss_value(cfg.loss, y, F, p)
        if not np.isfinite(loss):
            raise ConvergenceFailure("training loss became non-finite", stage=k + 1)
        trees.append(tree)
        losses.append(loss)

    dispersion = float("nan")
    if cfg.loss == "tweedie":
        dispersion = tweedie.estimate_dispersion(y, np.exp(F), p)
    return BoostedModel(init, tuple(trees), np.full(len(trees), cfg.learning_rate), cfg,
                        tuple(losses), dispersion)


def predict_gbm(m: BoostedModel, X) -> np.ndarray:
    return m.predict(X)
