"""OLS (optionally Campbell-Thompson restricted) and ridge regression."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import stats

from ..errors import ConfigError, SingularDesign, TooFewRows
from .base import FittedModel, ModelSpec, check_design, lstsq_pivoted, standardization


class LinearModel(FittedModel):
    """``intercept + X @ coef`` on the raw feature scale."""

    def __init__(self, spec, intercept, coef, x_mean, x_std, n_obs, active=None):
        super().__init__(spec, x_mean, x_std)
        self.intercept = float(intercept)
        self.coef = np.asarray(coef, dtype=float)
        self.n_obs = int(n_obs)
        self.active = np.ones(self.coef.size, bool) if active is None else np.asarray(active)

    def _raw_predict(self, X):
        return self.intercept + X @ self.coef

    def __repr__(self):
        return f"LinearModel(kind={self.spec.kind}, intercept={self.intercept:.6g}, coef={self.coef})"


def _ols_coefficients(X, y):
    Z = np.column_stack([np.ones(len(y)), X])
    beta = lstsq_pivoted(Z, y)
    return beta[0], beta[1:]


def fit_ols(X, y, ct_truncate: bool = True, spec: ModelSpec | None = None) -> LinearModel:
    """Least squares with an intercept.

    With ``ct_truncate`` the returned model floors its forecasts at zero. When
    ``spec.ct_signs`` is set, any slope whose sign contradicts its prior is
    removed and the regression refit on the remaining features until every
    surviving slope agrees with its prior.
    """
    X, y = check_design(X, y, min_rows=0)
    n, k = X.shape
    if n < k + 1:
        raise TooFewRows(f"OLS with {k} features needs at least {k + 1} rows, got {n}")
    if spec is None:
        spec = ModelSpec("ols_ct" if ct_truncate else "ols")
    elif spec.ct_truncate != ct_truncate:
        spec = ModelSpec("ols_ct" if ct_truncate else "ols", seed=spec.seed, ct_signs=spec.ct_signs, name=spec.name)

    active = np.ones(k, dtype=bool)
    signs = spec.ct_signs
    if signs is not None and len(signs) != k:
        raise ConfigError(f"ct_signs has {len(signs)} entries for {k} features")
    while True:
        b0, b = _ols_coefficients(X[:, active], y)
        coef = np.zeros(k)
        coef[active] = b
        if signs is None:
            break
        wrong = active & (np.asarray(signs) * coef < 0)
        if not wrong.any():
            break
        active &= ~wrong
    mu, sd = standardization(X)
    return LinearModel(spec, b0, coef, mu, sd, n, active)


def fit_ridge(X, y, lam: float = 1.0, spec: ModelSpec | None = None) -> LinearModel:
    """Ridge regression on standardized features with an unpenalized intercept.

    Minimizes ``||y - b0 - Xs @ b||^2 + lam * ||b||^2`` where ``Xs`` is ``X``
    centered and scaled by the fitting sample's population standard deviation.
    Coefficients are mapped back to the raw feature scale.
    """
    X, y = check_design(X, y, min_rows=2)
    if not lam >= 0:
        raise ConfigError("ridge penalty must be non-negative")
    if spec is None:
        spec = ModelSpec("ridge", ridge_lambda=lam)
    n, k = X.shape
    mu, sd = standardization(X)
    live = sd > 0
    model_warnings = []
    if not live.all():
        msg = f"zero-variance features {np.flatnonzero(~live).tolist()} get coefficient 0"
        model_warnings.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)

    y_mean = y.mean()
    b_std = np.zeros(k)
    if live.any():
        Xs = (X[:, live] - mu[live]) / sd[live]
        A = Xs
        rhs = y - y_mean
        if lam > 0:
            A = np.vstack([Xs, np.sqrt(lam) * np.eye(Xs.shape[1])])
            rhs = np.concatenate([rhs, np.zeros(Xs.shape[1])])
        b_std[live] = lstsq_pivoted(A, rhs)
    coef = np.zeros(k)
    coef[live] = b_std[live] / sd[live]
    intercept = y_mean - coef @ mu
    model = LinearModel(spec, intercept, coef, mu, sd, n)
    model.coef_standardized = b_std
    model.warnings.extend(model_warnings)
    return model


@dataclass(frozen=True)
class RegressionSummary:
    names: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    residuals: np.ndarray
    vif: np.ndarray
    n_obs: int
    r_squared: float

    def table(self) -> str:
        lines = [f"{'':>12} {'coef':>12} {'std err':>12} {'t':>9} {'P>|t|':>9} {'VIF':>9}"]
        for i, name in enumerate(self.names):
            vif = "" if i == 0 else f"{self.vif[i - 1]:9.3f}"
            lines.append(
                f"{name:>12} {self.coefficients[i]:12.6f} {self.std_errors[i]:12.6f} "
                f"{self.t_stats[i]:9.3f} {self.p_values[i]:9.4f} {vif:>9}"
            )
        lines.append(f"n = {self.n_obs}, R^2 = {self.r_squared:.4f}")
        return "\n".join(lines)


def variance_inflation(X) -> np.ndarray:
    """VIF per column; perfectly collinear columns get ``inf``."""
    X = np.asarray(X, dtype=float)
    n, k = X.shape
    out = np.empty(k)
    for j in range(k):
        yj = X[:, j]
        others = np.delete(X, j, axis=1)
        tss = np.sum((yj - yj.mean()) ** 2)
        if tss == 0:
            out[j] = np.inf
            continue
        try:
            b0, b = _ols_coefficients(others, yj) if k > 1 else (yj.mean(), np.zeros(0))
        except SingularDesign:
            # a duplicate among the other columns; drop dependent ones via lstsq
            Z = np.column_stack([np.ones(n), others])
            beta = np.linalg.lstsq(Z, yj, rcond=None)[0]
            b0, b = beta[0], beta[1:]
        rss = np.sum((yj - b0 - others @ b) ** 2)
        r2 = 1.0 - rss / tss
        out[j] = np.inf if r2 >= 1.0 - 1e-12 else 1.0 / (1.0 - r2)
    return out


def ols_inference(model: LinearModel, X, y, feature_names=None) -> RegressionSummary:
    """Classical homoskedastic inference for an OLS fit.

    Standard errors are ``sqrt(s^2 * diag((Z'Z)^-1))`` with
    ``s^2 = RSS / (n - k - 1)``; p-values are two-sided Student-t.
    """
    if model.spec.kind not in ("ols_ct", "ols"):
        raise ConfigError(f"inference needs an OLS model, got {model.spec.kind!r}")
    X, y = check_design(X, y, min_rows=0)
    n, k = X.shape
    Z = np.column_stack([np.ones(n), X])
    beta = np.concatenate([[model.intercept], model.coef])
    resid = y - Z @ beta
    dof = n - k - 1
    if dof <= 0:
        raise SingularDesign("no residual degrees of freedom")
    # pivoted QR for (Z'Z)^-1 = R^-1 R^-T
    _, R, perm = scipy.linalg.qr(Z, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    if d[0] == 0 or np.any(d < 1e-12 * d[0]):
        raise SingularDesign("design is rank deficient")
    Rinv = np.linalg.inv(R)
    cov_p = Rinv @ Rinv.T
    cov = np.empty_like(cov_p)
    cov[np.ix_(perm, perm)] = cov_p
    s2 = resid @ resid / dof
    se = np.sqrt(s2 * np.diag(cov))
    t = beta / se
    p = np.clip(2.0 * stats.t.sf(np.abs(t), dof), 0.0, 1.0)
    tss = np.sum((y - y.mean()) ** 2)
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(k))
    return RegressionSummary(
        names=("intercept", *names),
        coefficients=beta,
        std_errors=se,
        t_stats=t,
        p_values=p,
        residuals=resid,
        vif=variance_inflation(X),
        n_obs=n,
        r_squared=float(1.0 - resid @ resid / tss) if tss > 0 else float("nan"),
    )
