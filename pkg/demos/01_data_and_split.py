"""Building the monthly panel and splitting it.

Run from the repository root: ``python3 demos/01_data_and_split.py``.
"""

# %%
import numpy as np

from factor_timing import SplitSpec, split
from _data import dataset

ds = dataset()
print(len(ds), "aligned months:", ds.months[0], "to", ds.months[-1])
print("first month with every lag defined:", ds.first_usable_month)

# %% the target and its predictors
# tms = lty - tbl and dfy = baa - aaa; each feature is known one month ahead
for name in ("cma", *ds.feature_names):
    col = ds.panel[name]
    print(f"{name:>9}  mean {np.nanmean(col): .5f}  std {np.nanstd(col):.5f}")

# the lag really is last month's value
i = 100
assert ds.panel["cma_lag1"][i] == ds.panel["cma"][i - 1]

# %% train / test
train, test = split(ds, SplitSpec.default())
print("train", train.months[0], "-", train.months[-1], len(train), "months")
print("test ", test.months[0], "-", test.months[-1], len(test), "months")

# rows before the first usable month stay in the panel but never reach a model
X, y = train.features(train.usable), train.target(train.usable)
print("training design:", X.shape)
