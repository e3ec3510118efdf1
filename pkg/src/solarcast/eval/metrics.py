import numpy as np

from ..core import ConfigError, NonFiniteError


def _pair(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float).reshape(-1)
    yhat = np.asarray(yhat, dtype=float).reshape(-1)
    if y.size != yhat.size:
        raise ConfigError(f"length mismatch: {y.size} targets vs {yhat.size} predictions")
    if y.size == 0:
        raise ConfigError("metrics need at least one observation")
    return y, yhat


def r2(y, yhat) -> float:
    """Coefficient of determination, ``1 - SSE/SST``; undefined for constant ``y``."""
    y, yhat = _pair(y, yhat)
    sst = np.sum((y - y.mean()) ** 2)
    if sst == 0:
        raise NonFiniteError("r2 is undefined for a constant target")
    return float(1.0 - np.sum((y - yhat) ** 2) / sst)


def mae(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    return float(np.mean(np.abs(y - yhat)))


def rmse(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


SCORERS = {
    "r2": (r2, True),
    "mae": (mae, False),
    "rmse": (rmse, False),
}
