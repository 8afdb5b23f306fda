"""Out-of-sample forecasts, R^2 against a zero forecast, and timing weights."""

# %%
import numpy as np

from factor_timing import ModelSpec, SplitSpec, forecast, oos_r2, split, timed_weights
from factor_timing.models import ForestParams
from factor_timing.timing import constant_weights
from _data import dataset

ds = dataset()
sp = SplitSpec.default()
train, test = split(ds, sp)

# %% expanding window: one refit per test month, each on data before that month
specs = {
    "ols_ct": ModelSpec("ols_ct"),
    "ridge": ModelSpec("ridge"),
    "random_forest": ModelSpec("random_forest", rf_params=ForestParams(n_trees=30)),
    "nn3": ModelSpec("nn3"),  # fit once on the training sample
}
series = {name: forecast(ds, sp, spec) for name, spec in specs.items()}
for name, fs in series.items():
    print(f"{name:>14}: OOS R^2 {oos_r2(fs): .4f}")

# %% weights: forecast / (gamma * variance of returns through last month)
realized = ds.target()
weights = {name: timed_weights(fs, ds.months, realized) for name, fs in series.items()}
bench = constant_weights(test.months, train.target())
print(f"constant benchmark weight {bench.weight[0]:.3f}")
for name, ws in weights.items():
    w = ws.weight
    print(f"{name:>14}: mean {w.mean():.3f}  std {w.std():.3f}  mean |change| {np.abs(np.diff(w)).mean():.3f}")
