"""Tweedie unit deviance and its log-link derivatives (1 < p < 2)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ConfigError, NonFiniteError

DEFAULT_POWER = 1.5


@dataclass(frozen=True)
class TweedieSpec:
    power: float = DEFAULT_POWER
    dispersion: float = float("nan")

    def __post_init__(self):
        if not 1.0 < self.power < 2.0:
            raise ConfigError(f"tweedie power must lie strictly inside (1, 2), got {self.power}")


def _check_power(p: float) -> None:
    if not 1.0 < p < 2.0:
        raise ConfigError(f"tweedie power must lie strictly inside (1, 2), got {p}")


def tweedie_deviance(y, mu, p: float = DEFAULT_POWER):
    """Unit deviance ``2 [y^(2-p)/((1-p)(2-p)) - y mu^(1-p)/(1-p) + mu^(2-p)/(2-p)]``.

    Zero exactly when ``y == mu``; the ``y^(2-p)`` term vanishes at ``y = 0``.
    """
    _check_power(p)
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if (mu <= 0).any() or not np.isfinite(mu).all():
        raise NonFiniteError("tweedie deviance needs a positive finite mean")
    if (y < 0).any():
        raise ValueError("tweedie deviance needs y >= 0")
    d = 2.0 * (
        np.power(y, 2 - p) / ((1 - p) * (2 - p))
        - y * np.power(mu, 1 - p) / (1 - p)
        + np.power(mu, 2 - p) / (2 - p)
    )
    # rounding can leave tiny negatives near y == mu
    d = np.maximum(d, 0.0)
    return float(d) if d.ndim == 0 else d


def half_deviance_log_link(y, F, p: float = DEFAULT_POWER):
    """Per-row loss in the raw score ``F = log(mu)``, up to terms free of ``F``."""
    y = np.asarray(y, dtype=float)
    F = np.asarray(F, dtype=float)
    return -y * np.exp((1 - p) * F) / (1 - p) + np.exp((2 - p) * F) / (2 - p)


def gradient(y, F, p: float = DEFAULT_POWER):
    """d/dF of half the unit deviance at ``mu = exp(F)``."""
    y = np.asarray(y, dtype=float)
    F = np.asarray(F, dtype=float)
    return -y * np.exp((1 - p) * F) + np.exp((2 - p) * F)


def hessian(y, F, p: float = DEFAULT_POWER):
    y = np.asarray(y, dtype=float)
    F = np.asarray(F, dtype=float)
    return -(1 - p) * y * np.exp((1 - p) * F) + (2 - p) * np.exp((2 - p) * F)


def estimate_dispersion(y, mu, p: float = DEFAULT_POWER, dof: int = 1) -> float:
    """Scalar dispersion from the summed deviance, ``sum(d) / (n - dof)``."""
    y = np.asarray(y, dtype=float)
    n = y.size
    if n <= dof:
        return float("nan")
    return float(np.sum(tweedie_deviance(y, mu, p)) / (n - dof))
