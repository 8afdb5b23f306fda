"""Transaction costs and choosing how often to rebalance."""

# %%
import numpy as np

from factor_timing import CostModel, ModelSpec, SplitSpec, forecast, split, timed_weights
from factor_timing.backtest import run_backtest, select_rebalance_interval, subperiod_metrics
from _data import dataset

ds = dataset()
sp = SplitSpec.default()
_, test = split(ds, sp)
ws = timed_weights(forecast(ds, sp, ModelSpec("ridge")), ds.months, ds.target())
r = test.target()

# %% wealth from $1 under rising proportional costs
for bps in (0, 10, 20, 50):
    rep = run_backtest(ws, r, CostModel("proportional", bps / 1e4))
    print(f"{bps:>3} bps: terminal wealth {rep.terminal_wealth:.3f}, total cost {rep.total_cost:.4f}")

# %% Sharpe ratio by horizon, no costs
rep = run_backtest(ws, r)
for label, m in subperiod_metrics(rep).items():
    print(f"{label}: Sharpe {m.sharpe: .3f}  max drawdown {m.max_drawdown:.1%}")

# %% pick the interval on the first 40% of the test months, apply it to the rest
sel = select_rebalance_interval(ws, r, CostModel("proportional", 0.005))
print("validation wealth by interval:", {k: round(v, 4) for k, v in sel.validation_wealth.items()})
print(f"chosen every {sel.interval} months; extra annual return on the holdout {sel.extra_annual_return:.4%}")

# %% quadratic costs grow with the square of the capital
for n in (1, 2, 10):
    q = run_backtest(ws, r, CostModel("quadratic", 0.005), initial_wealth=float(n))
    print(f"initial ${n:>2}: first-month cost ${q.cost_dollar[0]:.6f}")
