"""The candidate regressors behind one ``fit_model`` / ``predict`` contract."""

from .base import (
    KINDS,
    FittedModel,
    ForestParams,
    ModelSpec,
    NN3Params,
    derive_seed,
    predict,
)
from .forest import ForestModel, Tree, fit_random_forest, grow_tree
from .linear import (
    LinearModel,
    RegressionSummary,
    fit_ols,
    fit_ridge,
    ols_inference,
    variance_inflation,
)
from .nn3 import NN3Model, fit_nn3


def fit_model(spec: ModelSpec, X, y, seed: int | None = None, n_jobs: int = 1) -> FittedModel:
    """Fit the model described by ``spec``; ``seed`` overrides ``spec.seed``."""
    seed = spec.seed if seed is None else seed
    if spec.kind in ("ols_ct", "ols"):
        return fit_ols(X, y, ct_truncate=spec.ct_truncate, spec=spec)
    if spec.kind == "ridge":
        return fit_ridge(X, y, spec.ridge_lambda, spec=spec)
    if spec.kind == "random_forest":
        return fit_random_forest(X, y, spec.rf_params, seed, spec=spec, n_jobs=n_jobs)
    if spec.kind == "nn3":
        return fit_nn3(X, y, spec.nn3_params, seed, spec=spec)
    raise AssertionError(spec.kind)


__all__ = [
    "KINDS",
    "FittedModel",
    "ForestModel",
    "ForestParams",
    "LinearModel",
    "ModelSpec",
    "NN3Model",
    "NN3Params",
    "RegressionSummary",
    "Tree",
    "derive_seed",
    "fit_model",
    "fit_nn3",
    "fit_ols",
    "fit_random_forest",
    "fit_ridge",
    "grow_tree",
    "ols_inference",
    "predict",
    "variance_inflation",
]
