"""The four regressors on the training sample."""

# %%
import numpy as np

from factor_timing import ModelSpec, SplitSpec, fit_model, split
from factor_timing.models import NN3Params, fit_ols, ols_inference
from _data import dataset

train, test = split(dataset(), SplitSpec.default())
X, y = train.features(train.usable), train.target(train.usable)
Xq = test.features()

# %% OLS: classical inference and multicollinearity diagnostics
ols = fit_ols(X, y, ct_truncate=False)
print(ols_inference(ols, X, y, train.feature_names).table())

# %% Campbell-Thompson: negative forecasts are floored at zero
ct = fit_model(ModelSpec("ols_ct"), X, y)
raw = ols.predict(Xq)
print(f"raw OLS forecasts below zero: {np.mean(raw < 0):.1%}; after the floor: {np.mean(ct.predict(Xq) < 0):.1%}")

# %% ridge on standardized features, intercept unpenalized
for lam in (0.0, 1.0, 100.0):
    r = fit_model(ModelSpec("ridge", ridge_lambda=lam), X, y)
    print(f"lambda {lam:>6}: standardized coefficients {np.round(r.coef_standardized, 5)}")

# %% the forest: 100 bagged trees of at most 6 leaves each
rf = fit_model(ModelSpec("random_forest", seed=0), X, y)
print("leaves per tree:", sorted({t.n_leaves for t in rf.trees}))
p = rf.predict(Xq)
print(f"forecast range [{p.min():.4f}, {p.max():.4f}] inside target range [{y.min():.4f}, {y.max():.4f}]")

# %% NN3: 32-16-8 ReLU network, full-batch gradient descent
nn = fit_model(ModelSpec("nn3", nn3_params=NN3Params(epochs=2000), seed=0), X, y)
print(f"training loss {nn.losses[0]:.4f} -> {nn.losses[-1]:.4f} (standardized units)")
