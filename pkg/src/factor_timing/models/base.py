from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from ..errors import ArityMismatch, ConfigError, SingularDesign, TooFewRows

KINDS = ("ols_ct", "ols", "ridge", "random_forest", "nn3")
NN3_WIDTHS = (32, 16, 8)

# pivots below this fraction of the largest pivot mark a rank-deficient design
PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_leaf_nodes: int = 6
    feature_subsample: int = 2
    bootstrap: bool = True

    def __post_init__(self):
        if self.max_leaf_nodes < 2:
            raise ConfigError("max_leaf_nodes must be at least 2")
        if self.n_trees < 1:
            raise ConfigError("n_trees must be positive")
        if self.feature_subsample < 1:
            raise ConfigError("feature_subsample must be positive")


@dataclass(frozen=True)
class NN3Params:
    layer_widths: tuple[int, ...] = NN3_WIDTHS
    epochs: int = 2000
    learning_rate: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "layer_widths", tuple(int(w) for w in self.layer_widths))
        if self.layer_widths != NN3_WIDTHS:
            raise ConfigError(f"NN3 hidden widths are fixed at {list(NN3_WIDTHS)}")
        if self.epochs < 0 or not self.learning_rate > 0:
            raise ConfigError("epochs must be >= 0 and learning_rate > 0")


@dataclass(frozen=True)
class ModelSpec:
    """What to fit and how.

    ``ct_truncate`` floors predictions at zero; it is on exactly for
    ``ols_ct``. ``ct_signs`` optionally imposes the coefficient-sign side of
    the Campbell-Thompson restriction (one of -1, 0, +1 per feature, 0 meaning
    unrestricted); it is off by default.
    """

    kind: str
    ridge_lambda: float = 1.0
    rf_params: ForestParams = field(default_factory=ForestParams)
    nn3_params: NN3Params = field(default_factory=NN3Params)
    seed: int = 0
    ct_signs: tuple[int, ...] | None = None
    name: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if not self.ridge_lambda >= 0:
            raise ConfigError("ridge_lambda must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        if self.ct_signs is not None:
            object.__setattr__(self, "ct_signs", tuple(int(s) for s in self.ct_signs))
            if any(s not in (-1, 0, 1) for s in self.ct_signs):
                raise ConfigError("ct_signs entries must be -1, 0 or +1")

    @property
    def ct_truncate(self) -> bool:
        return self.kind == "ols_ct"

    @property
    def label(self) -> str:
        return self.name or self.kind

    def with_seed(self, seed: int) -> "ModelSpec":
        return replace(self, seed=int(seed))


class FittedModel:
    """A trained regressor.

    Subclasses implement ``_raw_predict`` on a 2-D feature matrix; the
    Campbell-Thompson floor and arity checks live in :meth:`predict`.
    """

    def __init__(self, spec: ModelSpec, x_mean, x_std):
        self.spec = spec
        self.x_mean = np.asarray(x_mean, dtype=float)
        self.x_std = np.asarray(x_std, dtype=float)
        self.warnings: list[str] = []

    @property
    def n_features(self) -> int:
        return int(self.x_mean.size)

    def _raw_predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray | float:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X2 = X.reshape(1, -1) if single else X
        if X2.ndim != 2 or X2.shape[1] != self.n_features:
            raise ArityMismatch(
                f"model expects {self.n_features} features, got shape {X.shape}"
            )
        if not np.all(np.isfinite(X2)):
            raise ArityMismatch("feature values must be finite")
        out = self._raw_predict(X2)
        if self.spec.ct_truncate:
            out = np.maximum(out, 0.0)
        return float(out[0]) if single else out


def predict(model: FittedModel, x) -> float | np.ndarray:
    return model.predict(x)


def standardization(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and population standard deviations of the fitting sample."""
    return X.mean(axis=0), X.std(axis=0)


def check_design(X, y, min_rows: int) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape[0] != y.size:
        raise ArityMismatch(f"X has {X.shape[0]} rows but y has {y.size}")
    if y.size < min_rows:
        raise TooFewRows(f"need at least {min_rows} rows, got {y.size}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ArityMismatch("design contains non-finite values")
    return X, y


def lstsq_pivoted(A: np.ndarray, b: np.ndarray, tol: float = PIVOT_TOL) -> np.ndarray:
    """Least squares through column-pivoted QR, refusing rank-deficient designs."""
    Q, R, perm = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0 or np.any(diag < tol * diag[0]):
        raise SingularDesign(
            f"design is rank deficient (pivot ratio {diag.min() / max(diag[0], 1e-300):.3g})"
        )
    z = scipy.linalg.solve_triangular(R, Q.T @ b)
    beta = np.empty_like(z)
    beta[perm] = z
    return beta


def derive_seed(*parts: int) -> int:
    """Deterministic 64-bit seed from integers, e.g. ``(base_seed, month)``."""
    ss = np.random.SeedSequence([int(p) for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
