"""One-step-ahead out-of-sample forecasting and its scoring."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dataio import AlignedDataset, SplitSpec, write_csv
from .errors import ConfigError, EmptyPartition, FactorTimingError, ForecastFailure, ZeroDenominator
from .models import ModelSpec, derive_seed, fit_model

# fitter(spec, X, y, seed) -> object with .predict(x_row) -> float
Fitter = Callable[[ModelSpec, np.ndarray, np.ndarray, int], object]


def _default_fitter(spec, X, y, seed):
    return fit_model(spec, X, y, seed=seed)


@dataclass(frozen=True)
class ForecastSeries:
    months: np.ndarray
    forecast: np.ndarray
    actual: np.ndarray
    label: str = ""

    def __post_init__(self):
        for name in ("months", "forecast", "actual"):
            a = np.array(getattr(self, name), dtype=np.int64 if name == "months" else float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not (self.months.shape == self.forecast.shape == self.actual.shape):
            raise ValueError("months, forecast and actual must have equal length")
        if not (np.all(np.isfinite(self.forecast)) and np.all(np.isfinite(self.actual))):
            raise ValueError("forecast series must be finite")

    def __len__(self):
        return int(self.months.size)

    def dump(self, path) -> None:
        write_csv(
            path,
            ("yyyymm", "actual", "forecast"),
            ([int(m), float(a), float(f)] for m, a, f in zip(self.months, self.actual, self.forecast)),
        )


def _test_rows(ds: AlignedDataset, split: SplitSpec) -> np.ndarray:
    months = ds.months
    rows = np.flatnonzero((months >= split.test_start) & (months <= split.test_end))
    if rows.size == 0:
        raise EmptyPartition(f"no months in test range {split.test_start}-{split.test_end}")
    if months[rows[0]] < ds.first_usable_month:
        raise EmptyPartition("test period starts before the first month with all features")
    return rows


def _train_mask(ds: AlignedDataset, split: SplitSpec, before: int) -> np.ndarray:
    return ds.usable & (ds.months >= split.train_start) & (ds.months < before)


def expanding_window_forecast(
    ds: AlignedDataset,
    split: SplitSpec,
    spec: ModelSpec,
    fitter: Fitter | None = None,
    n_jobs: int = 1,
) -> ForecastSeries:
    """Refit every month on all rows before it, then forecast that month.

    The first fit uses the whole training period; each later test month adds
    the months already realized. Refit ``t`` is seeded with
    ``derive_seed(spec.seed, t)``.
    """
    if spec.kind == "nn3" and fitter is None:
        raise ConfigError("NN3 is trained once on the training period; use static_forecast")
    fitter = fitter or _default_fitter
    X = ds.features()
    y = ds.target()
    rows = _test_rows(ds, split)

    def one(r):
        month = int(ds.months[r])
        mask = _train_mask(ds, split, month)
        try:
            model = fitter(spec, X[mask], y[mask], derive_seed(spec.seed, month))
            return float(model.predict(X[r]))
        except FactorTimingError as exc:
            raise ForecastFailure(month, exc) from exc

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            out = list(pool.map(one, rows))
    else:
        out = [one(r) for r in rows]
    return ForecastSeries(ds.months[rows], np.asarray(out), y[rows], spec.label)


def static_forecast(
    ds: AlignedDataset,
    split: SplitSpec,
    spec: ModelSpec,
    fitter: Fitter | None = None,
) -> ForecastSeries:
    """Fit once on the training period and forecast every test month."""
    fitter = fitter or _default_fitter
    X = ds.features()
    y = ds.target()
    rows = _test_rows(ds, split)
    mask = ds.usable & (ds.months >= split.train_start) & (ds.months <= split.train_end)
    try:
        model = fitter(spec, X[mask], y[mask], spec.seed)
        out = np.asarray(model.predict(X[rows]), dtype=float)
    except FactorTimingError as exc:
        raise ForecastFailure(int(ds.months[rows[0]]), exc) from exc
    return ForecastSeries(ds.months[rows], out, y[rows], spec.label)


def forecast(ds, split, spec: ModelSpec, n_jobs: int = 1) -> ForecastSeries:
    """Static fit for NN3, expanding window for everything else."""
    if spec.kind == "nn3":
        return static_forecast(ds, split, spec)
    return expanding_window_forecast(ds, split, spec, n_jobs=n_jobs)


def r2_zero_mean(actual, forecast) -> float:
    actual = np.asarray(actual, dtype=float)
    forecast = np.asarray(forecast, dtype=float)
    denom = float(actual @ actual)
    if denom == 0.0:
        raise ZeroDenominator("all actual returns are zero")
    err = actual - forecast
    return 1.0 - float(err @ err) / denom


def oos_r2(fs: ForecastSeries) -> float:
    """Out-of-sample R^2 against a zero forecast: ``1 - SSE / sum(actual^2)``."""
    if len(fs) < 1:
        raise EmptyPartition("empty forecast series")
    return r2_zero_mean(fs.actual, fs.forecast)
