"""Yeo-Johnson power transform with per-column maximum-likelihood lambda."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ConvergenceFailure, NonFiniteError

LAMBDA_BOUNDS = (-5.0, 5.0)
GRID_STEP = 0.1
GOLDEN_TOL = 1e-6
# |lambda| or |lambda - 2| below this uses the log branches
SINGULAR_EPS = 1e-8

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def _as_output(out: np.ndarray, like):
    return float(out) if np.ndim(like) == 0 else out


def yeo_johnson(x, lmbda: float):
    """Forward transform; scalar in, scalar out."""
    x = np.asarray(x, dtype=float)
    if not np.isfinite(x).all() or not np.isfinite(lmbda):
        raise NonFiniteError("yeo_johnson needs finite x and lambda")
    out = np.empty_like(x)
    pos = x >= 0
    neg = ~pos
    with np.errstate(over="ignore", invalid="ignore"):
        if abs(lmbda) < SINGULAR_EPS:
            out[pos] = np.log1p(x[pos])
        else:
            out[pos] = np.expm1(lmbda * np.log1p(x[pos])) / lmbda
        if abs(lmbda - 2.0) < SINGULAR_EPS:
            out[neg] = -np.log1p(-x[neg])
        else:
            out[neg] = -np.expm1((2.0 - lmbda) * np.log1p(-x[neg])) / (2.0 - lmbda)
    if not np.isfinite(out).all():
        raise NonFiniteError(f"yeo_johnson overflows at lambda={lmbda!r}")
    return _as_output(out, x)


def image_bounds(lmbda: float) -> tuple[float, float]:
    """Open interval that the forward map covers for this lambda."""
    lo, hi = -np.inf, np.inf
    if lmbda < -SINGULAR_EPS:
        hi = -1.0 / lmbda
    if lmbda > 2.0 + SINGULAR_EPS:
        lo = -1.0 / (lmbda - 2.0)
    return lo, hi


def yeo_johnson_inverse(y, lmbda: float):
    """Inverse transform; values outside the forward image raise NonFiniteError."""
    y = np.asarray(y, dtype=float)
    if not np.isfinite(y).all() or not np.isfinite(lmbda):
        raise NonFiniteError("yeo_johnson_inverse needs finite y and lambda")
    lo, hi = image_bounds(lmbda)
    if (y <= lo).any() or (y >= hi).any():
        raise NonFiniteError(f"value outside the image ({lo}, {hi}) of lambda={lmbda!r}")
    out = np.empty_like(y)
    pos = y >= 0
    neg = ~pos
    with np.errstate(over="ignore", invalid="ignore"):
        if abs(lmbda) < SINGULAR_EPS:
            out[pos] = np.expm1(y[pos])
        else:
            out[pos] = np.expm1(np.log1p(lmbda * y[pos]) / lmbda)
        if abs(lmbda - 2.0) < SINGULAR_EPS:
            out[neg] = -np.expm1(-y[neg])
        else:
            k = 2.0 - lmbda
            out[neg] = -np.expm1(np.log1p(-k * y[neg]) / k)
    if not np.isfinite(out).all():
        raise NonFiniteError(f"yeo_johnson_inverse overflows at lambda={lmbda!r}")
    return _as_output(out, y)


def log_likelihood(x: np.ndarray, lmbda: float) -> float:
    """Profile log-likelihood of lambda under a normal model for the transformed data.

    ``-n/2 * log(var(yj(x))) + (lambda - 1) * sum(sign(x) * log1p(|x|))``;
    ``-inf`` where the transform overflows or collapses.
    """
    x = np.asarray(x, dtype=float)
    try:
        t = yeo_johnson(x, lmbda)
    except NonFiniteError:
        return -np.inf
    var = t.var()
    if not np.isfinite(var) or var <= 0:
        return -np.inf
    return -0.5 * x.size * np.log(var) + (lmbda - 1.0) * np.sum(np.sign(x) * np.log1p(np.abs(x)))


@dataclass(frozen=True)
class LambdaFit:
    lmbda: float
    loglik: float
    at_bound: bool


def fit_lambda_detail(column, bounds: tuple[float, float] = LAMBDA_BOUNDS) -> LambdaFit:
    x = np.asarray(column, dtype=float)
    x = x[np.isfinite(x)]
    if x.size < 3:
        raise ConvergenceFailure(f"need at least 3 finite values to fit lambda, got {x.size}")
    if np.ptp(x) == 0:
        raise ConvergenceFailure("constant column: likelihood is flat in lambda")

    lo, hi = bounds
    grid = np.linspace(lo, hi, int(round((hi - lo) / GRID_STEP)) + 1)
    ll = np.array([log_likelihood(x, g) for g in grid])
    if not np.isfinite(ll).any():
        raise NonFiniteError("log-likelihood is non-finite over the whole lambda range")
    if np.nanmax(ll) - np.nanmin(ll[np.isfinite(ll)]) == 0:
        raise ConvergenceFailure("likelihood is flat in lambda")
    i = int(np.argmax(ll))

    # golden-section search on the bracket around the best grid point
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, grid.size - 1)]
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = log_likelihood(x, c), log_likelihood(x, d)
    while b - a > GOLDEN_TOL:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = log_likelihood(x, c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = log_likelihood(x, d)
    best = (a + b) / 2.0
    fbest = log_likelihood(x, best)
    if fbest < ll[i]:
        best, fbest = float(grid[i]), float(ll[i])
    at_bound = bool(min(best - lo, hi - best) < GRID_STEP / 2)
    return LambdaFit(float(best), float(fbest), at_bound)


def fit_lambda(column) -> float:
    """Maximum-likelihood lambda over [-5, 5]: coarse grid, then golden section."""
    return fit_lambda_detail(column).lmbda


@dataclass(frozen=True)
class PowerTransformer:
    """Fitted per-column lambdas plus the standardization constants.

    Columns with no spread are passed through unchanged (``passthrough``),
    other columns are mapped ``(yj(x, lambda) - mean) / scale``.
    """

    lambdas: np.ndarray
    means: np.ndarray
    scales: np.ndarray
    loglik: np.ndarray
    passthrough: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("lambdas", "means", "scales", "loglik"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        pt = self.passthrough
        pt = np.zeros(self.lambdas.size, dtype=bool) if pt is None else np.asarray(pt, dtype=bool)
        object.__setattr__(self, "passthrough", pt)

    @property
    def n_columns(self) -> int:
        return self.lambdas.size

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        squeeze = X.ndim == 1
        X2 = X.reshape(-1, 1) if squeeze else X
        if X2.shape[1] != self.n_columns:
            raise ValueError(f"expected {self.n_columns} columns, got {X2.shape[1]}")
        return X2

    def apply(self, X) -> np.ndarray:
        X2 = self._check(X)
        out = np.empty_like(X2)
        for j in range(self.n_columns):
            col = X2[:, j]
            if self.passthrough[j]:
                out[:, j] = col
            else:
                out[:, j] = (yeo_johnson(col, self.lambdas[j]) - self.means[j]) / self.scales[j]
        return out.reshape(np.shape(X))

    def invert(self, Xt, clip: bool = False) -> np.ndarray:
        """Undo :meth:`apply`.

        With ``clip=True`` values beyond the transform's image are pulled just
        inside it instead of raising.
        """
        X2 = self._check(Xt)
        out = np.empty_like(X2)
        for j in range(self.n_columns):
            col = X2[:, j]
            if self.passthrough[j]:
                out[:, j] = col
                continue
            t = col * self.scales[j] + self.means[j]
            if clip:
                lo, hi = image_bounds(self.lambdas[j])
                t = np.clip(t, np.nextafter(lo, 0.0) if np.isfinite(lo) else -np.inf,
                            np.nextafter(hi, 0.0) if np.isfinite(hi) else np.inf)
            out[:, j] = yeo_johnson_inverse(t, self.lambdas[j])
        return out.reshape(np.shape(Xt))

    def to_dict(self) -> dict:
        return {
            "lambdas": self.lambdas.tolist(),
            "means": self.means.tolist(),
            "scales": self.scales.tolist(),
            "loglik": self.loglik.tolist(),
            "passthrough": self.passthrough.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PowerTransformer":
        return cls(d["lambdas"], d["means"], d["scales"], d["loglik"], d["passthrough"])


def fit_transformer(X) -> PowerTransformer:
    """Fit lambda and standardization constants column by column."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    d = X.shape[1]
    lambdas = np.ones(d)
    means = np.zeros(d)
    scales = np.ones(d)
    loglik = np.full(d, np.nan)
    passthrough = np.zeros(d, dtype=bool)
    for j in range(d):
        col = X[:, j]
        if np.ptp(col) == 0:
            passthrough[j] = True
            continue
        fit = fit_lambda_detail(col)
        t = yeo_johnson(col, fit.lmbda)
        sd = t.std()
        if not sd > 0:
            passthrough[j] = True
            continue
        lambdas[j], loglik[j] = fit.lmbda, fit.loglik
        means[j], scales[j] = t.mean(), sd
    return PowerTransformer(lambdas, means, scales, loglik, passthrough)
