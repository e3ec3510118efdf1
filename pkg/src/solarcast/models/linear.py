"""Ordinary and ridge least squares, and logistic regression by IRLS."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..core import ConfigError, ConvergenceFailure, EmptySplitError, NonFiniteError, SingularMatrixError


@dataclass(frozen=True)
class LinearModel:
    intercept: float
    coef: np.ndarray
    l2: float = 0.0

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.coef.size:
            raise ValueError(f"expected {self.coef.size} features, got shape {X.shape}")
        out = self.intercept + X @ self.coef
        if not np.isfinite(out).all():
            raise NonFiniteError("linear prediction is non-finite")
        return out

    def to_dict(self) -> dict:
        return {"intercept": self.intercept, "coef": self.coef.tolist(), "l2": self.l2}

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        return cls(float(d["intercept"]), np.asarray(d["coef"], dtype=float), float(d["l2"]))


def fit_linear(X, y, l2: float = 0.0, sample_weight=None) -> LinearModel:
    """Minimize ``||y - b0 - X b||^2 + l2 ||b||^2`` with an unpenalized intercept.

    Solved through a QR factorization of the centred (and, for ridge,
    augmented) design. A rank-deficient design without ridge raises
    :class:`SingularMatrixError`.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if l2 < 0:
        raise ValueError("l2 must be non-negative")
    n, d = X.shape
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    sw = np.sqrt(w)
    x_mean = w @ X / w.sum()
    y_mean = w @ y / w.sum()
    A = (X - x_mean) * sw[:, None]
    b = (y - y_mean) * sw
    if l2 > 0:
        A = np.vstack([A, np.sqrt(l2) * np.eye(d)])
        b = np.concatenate([b, np.zeros(d)])
    elif n <= d:
        raise SingularMatrixError(f"{n} rows cannot determine {d} coefficients and an intercept")
    Q, R = np.linalg.qr(A)
    diag = np.abs(np.diag(R))
    tol = max(A.shape) * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
    if d and (diag <= tol).any():
        raise SingularMatrixError("design matrix is rank deficient", rank=int((diag > tol).sum()), columns=d)
    coef = np.linalg.solve(R, Q.T @ b) if d else np.zeros(0)
    intercept = float(y_mean - x_mean @ coef)
    if not (np.isfinite(coef).all() and np.isfinite(intercept)):
        raise NonFiniteError("linear fit produced non-finite coefficients")
    return LinearModel(intercept, coef, float(l2))


def predict_linear(m: LinearModel, X) -> np.ndarray:
    return m.predict(X)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class SeparationWarning(UserWarning):
    """The classes are (quasi-)perfectly separable; coefficients diverge."""


@dataclass(frozen=True)
class LogisticModel:
    intercept: float
    coef: np.ndarray
    converged: bool = True
    n_iter: int = 0

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return self.intercept + X @ self.coef

    def predict_proba(self, X) -> np.ndarray:
        p = _sigmoid(self.decision_function(X))
        # keep strictly inside (0, 1)
        return np.clip(p, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)

    predict = predict_proba

    def to_dict(self) -> dict:
        return {"intercept": self.intercept, "coef": self.coef.tolist(),
                "converged": self.converged, "n_iter": self.n_iter}

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticModel":
        return cls(float(d["intercept"]), np.asarray(d["coef"], dtype=float),
                   bool(d["converged"]), int(d["n_iter"]))


def fit_logistic(X, z, max_iter: int = 100, tol: float = 1e-8, l2: float = 0.0) -> LogisticModel:
    """Bernoulli maximum likelihood by iteratively reweighted least squares.

    ``l2`` adds ``l2/2 * ||coef||^2`` (intercept unpenalized) to the negative
    log-likelihood, which keeps the estimate finite under separation. Stops
    once the largest coefficient change drops below ``tol``. When the classes
    separate and ``l2 == 0`` the likelihood has no finite maximizer; the last
    iterate is returned with ``converged=False`` and a :class:`SeparationWarning`.
    """
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    if not np.isin(z, (0.0, 1.0)).all():
        raise ValueError("logistic targets must be 0 or 1")
    if z.min() == z.max():
        raise EmptySplitError("logistic regression needs both classes present")
    if l2 < 0:
        raise ConfigError(f"l2 must be non-negative, got {l2}")
    n, d = X.shape
    A = np.hstack([np.ones((n, 1)), X])
    pen = np.hstack([np.zeros((d, 1)), np.sqrt(l2) * np.eye(d)])
    p0 = z.mean()
    theta = np.zeros(d + 1)
    theta[0] = np.log(p0 / (1 - p0))
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        eta = A @ theta
        p = _sigmoid(eta)
        w = np.maximum(p * (1 - p), 1e-12)
        work = eta + (z - p) / w
        sw = np.sqrt(w)
        lhs, rhs = A * sw[:, None], work * sw
        if l2 > 0:
            lhs, rhs = np.vstack([lhs, pen]), np.concatenate([rhs, np.zeros(d)])
        new, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
        if not np.isfinite(new).all():
            raise ConvergenceFailure("IRLS produced non-finite coefficients", iteration=it)
        step = np.max(np.abs(new - theta))
        theta = new
        if step < tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"logistic IRLS did not converge in {max_iter} iterations; the classes look separable",
            SeparationWarning,
            stacklevel=2,
        )
    return LogisticModel(float(theta[0]), theta[1:].copy(), converged, it)
