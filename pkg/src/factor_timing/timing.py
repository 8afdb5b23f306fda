"""Mean-variance timing weights for a factor held against the risk-free asset.

An investor with utility ``E[r] - gamma * var(r)`` holds
``forecast / (gamma * variance)`` of wealth in the factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import add_months, write_csv
from .errors import ConfigError, NonpositiveVariance, TooFewObservations, ZeroVariance


@dataclass(frozen=True)
class TimingConfig:
    gamma: float = 2.0
    weight_cap: float | None = None

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigError("gamma must be positive")
        if self.weight_cap is not None and not self.weight_cap > 0:
            raise ConfigError("weight_cap must be positive when set")


@dataclass(frozen=True)
class WeightSeries:
    months: np.ndarray
    weight: np.ndarray
    variance_used: np.ndarray
    label: str = ""

    def __post_init__(self):
        for name in ("months", "weight", "variance_used"):
            a = np.array(getattr(self, name), dtype=np.int64 if name == "months" else float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not (self.months.shape == self.weight.shape == self.variance_used.shape):
            raise ValueError("months, weight and variance_used must have equal length")
        if not np.all(np.isfinite(self.weight)):
            raise ValueError("weights must be finite")

    def __len__(self):
        return int(self.months.size)

    def take(self, sl) -> "WeightSeries":
        return WeightSeries(self.months[sl], self.weight[sl], self.variance_used[sl], self.label)

    def scaled(self, k: float) -> "WeightSeries":
        return WeightSeries(self.months, self.weight * k, self.variance_used, self.label)

    def dump(self, path) -> None:
        write_csv(
            path,
            ("yyyymm", "weight", "variance_used"),
            ([int(m), float(w), float(v)] for m, w, v in zip(self.months, self.weight, self.variance_used)),
        )


def _variance(values: np.ndarray) -> float:
    if values.size < 2:
        raise TooFewObservations(f"variance needs at least 2 observations, got {values.size}")
    if np.ptp(values) == 0:
        raise ZeroVariance("all observations are equal")
    return float(np.var(values, ddof=1))


def expanding_variance(returns, months, upto_month: int) -> float:
    """Sample variance (``n - 1``) of every return from the start through ``upto_month``."""
    returns = np.asarray(returns, dtype=float)
    months = np.asarray(months)
    return _variance(returns[months <= upto_month])


def optimal_weight(forecast: float, variance: float, cfg: TimingConfig = TimingConfig()) -> float:
    if not variance > 0:
        raise NonpositiveVariance(f"variance must be positive, got {variance}")
    w = forecast / (cfg.gamma * variance)
    if cfg.weight_cap is not None:
        w = min(max(w, -cfg.weight_cap), cfg.weight_cap)
    return float(w)


def timed_weights(fs, realized_months, realized_returns, cfg: TimingConfig = TimingConfig()) -> WeightSeries:
    """Weights for each forecast month ``t``.

    The numerator is the forecast for ``t``; the denominator is the expanding
    variance of realized returns through ``t - 1``, so every input is known at
    the start of month ``t``.
    """
    realized_months = np.asarray(realized_months)
    realized_returns = np.asarray(realized_returns, dtype=float)
    if realized_months.size == 0 or realized_months[-1] < fs.months[-1]:
        raise TooFewObservations("realized history must cover the whole forecast period")
    weights = np.empty(len(fs))
    variances = np.empty(len(fs))
    for i, (month, f) in enumerate(zip(fs.months, fs.forecast)):
        var = expanding_variance(realized_returns, realized_months, add_months(int(month), -1))
        variances[i] = var
        weights[i] = optimal_weight(float(f), var, cfg)
    return WeightSeries(fs.months, weights, variances, fs.label)


def constant_weight(train_returns, cfg: TimingConfig = TimingConfig()) -> float:
    """The unconditional benchmark: training mean over ``gamma`` times training variance."""
    train_returns = np.asarray(train_returns, dtype=float)
    var = _variance(train_returns)
    return optimal_weight(float(train_returns.mean()), var, cfg)


def constant_weights(months, train_returns, cfg: TimingConfig = TimingConfig(), label="constant") -> WeightSeries:
    train_returns = np.asarray(train_returns, dtype=float)
    w = constant_weight(train_returns, cfg)
    n = len(months)
    return WeightSeries(months, np.full(n, w), np.full(n, _variance(train_returns)), label)
