"""Three-hidden-layer ReLU network (32-16-8) trained by full-batch gradient descent."""

from __future__ import annotations

import numpy as np

from ..errors import DivergedTraining
from .base import FittedModel, ModelSpec, NN3Params, check_design, standardization


def init_params(n_in: int, widths=(32, 16, 8), rng=None) -> list[np.ndarray]:
    """He-normal weights, zero biases: ``[W1, b1, ..., W4, b4]``."""
    rng = rng if rng is not None else np.random.default_rng(0)
    sizes = [n_in, *widths, 1]
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        params.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))
    return params


def forward(params, X):
    """Output vector and the per-layer cache needed for backprop."""
    a = X
    cache = [a]
    n_layers = len(params) // 2
    for i in range(n_layers):
        W, b = params[2 * i], params[2 * i + 1]
        z = a @ W + b
        if i < n_layers - 1:
            cache.append(z)
            a = np.maximum(z, 0.0)
            cache.append(a)
        else:
            a = z
    return a[:, 0], cache


def loss_and_grad(params, X, y):
    """Mean squared error and its gradient with respect to every parameter."""
    out, cache = forward(params, X)
    n = y.size
    resid = out - y
    loss = float(resid @ resid / n)
    n_layers = len(params) // 2
    grads = [None] * len(params)
    delta = (2.0 / n) * resid[:, None]
    for i in reversed(range(n_layers)):
        a_prev = cache[2 * i] if i > 0 else cache[0]
        grads[2 * i] = a_prev.T @ delta
        grads[2 * i + 1] = delta.sum(axis=0)
        if i > 0:
            z_prev = cache[2 * i - 1]
            delta = (delta @ params[2 * i].T) * (z_prev > 0)
    return loss, grads


class NN3Model(FittedModel):
    def __init__(self, spec, params, x_mean, x_std, y_mean, y_scale, losses):
        super().__init__(spec, x_mean, x_std)
        self.params = params
        self.y_mean = float(y_mean)
        self.y_scale = float(y_scale)
        self.losses = np.asarray(losses)

    def _raw_predict(self, X):
        Xs = (X - self.x_mean) / self.x_std
        out, _ = forward(self.params, Xs)
        return out * self.y_scale + self.y_mean


def fit_nn3(X, y, params: NN3Params | None = None, seed: int = 0, spec: ModelSpec | None = None) -> NN3Model:
    """Train the network on standardized inputs and a standardized target.

    Plain gradient descent on the full batch for ``params.epochs`` steps.
    ``losses[e]`` is the training loss (standardized target units) before
    step ``e``; the last entry is the final loss.
    """
    X, y = check_design(X, y, min_rows=2)
    params = params or (spec.nn3_params if spec is not None else NN3Params())
    if spec is None:
        spec = ModelSpec("nn3", nn3_params=params, seed=seed)
    mu, sd = standardization(X)
    sd = np.where(sd > 0, sd, 1.0)
    y_mean = y.mean()
    y_scale = y.std()
    if not y_scale > 0:
        y_scale = 1.0
    Xs = (X - mu) / sd
    ys = (y - y_mean) / y_scale

    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    theta = init_params(X.shape[1], params.layer_widths, rng)
    lr = params.learning_rate
    losses = np.empty(params.epochs + 1)
    for epoch in range(params.epochs + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            loss, grads = loss_and_grad(theta, Xs, ys)
        if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads):
            raise DivergedTraining(
                f"non-finite training loss at epoch {epoch} (learning_rate={lr}); "
                "lower the learning rate"
            )
        losses[epoch] = loss
        if epoch == params.epochs:
            break
        for p, g in zip(theta, grads):
            p -= lr * g
    return NN3Model(spec, theta, mu, sd, y_mean, y_scale, losses)
