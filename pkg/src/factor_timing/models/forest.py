"""Best-first regression trees and a bagged forest of them.

Each tree grows by repeatedly splitting whichever frontier leaf offers the
largest reduction in squared error, stopping at ``max_leaf_nodes`` leaves or
when no leaf can be improved. Thresholds sit at midpoints between consecutive
distinct feature values. Equal reductions resolve to the lower feature index,
then the lower threshold; equal leaves resolve to the one created first.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .base import FittedModel, ForestParams, ModelSpec, check_design, standardization


@dataclass
class Tree:
    feature: np.ndarray  # -1 at leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        node = np.zeros(X.shape[0], dtype=np.intp)
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return node
            rows = np.flatnonzero(inner)
            go_left = X[rows, f[rows]] <= self.threshold[node[rows]]
            node[rows] = np.where(go_left, self.left[node[rows]], self.right[node[rows]])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


def best_split(X, y, features):
    """Best (gain, feature, threshold) for one node, or None.

    ``gain`` is the parent SSE minus the children's SSE.
    """
    n = y.size
    if n < 2 or np.ptp(y) == 0:
        return None
    yc = y - y.mean()
    total = yc.sum()
    best = None
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        cs = np.cumsum(yc[order])[:-1]
        cut = np.flatnonzero(xs[1:] > xs[:-1])
        if cut.size == 0:
            continue
        n_left = cut + 1.0
        s_left = cs[cut]
        s_right = total - s_left
        gain = s_left**2 / n_left + s_right**2 / (n - n_left) - total**2 / n
        i = int(np.argmax(gain))
        if best is None or gain[i] > best[0]:
            c = cut[i]
            best = (float(gain[i]), int(f), 0.5 * (xs[c] + xs[c + 1]))
    if best is None or not best[0] > 0:
        return None
    return best


def _leaf_value(y: np.ndarray) -> float:
    # the mean can round one ulp past the extremes; keep it inside
    return float(min(max(y.mean(), y.min()), y.max()))


def grow_tree(X, y, max_leaf_nodes, feature_subsample=None, rng=None) -> Tree:
    """Grow one best-first tree on ``(X, y)``.

    With ``feature_subsample`` below the number of features, each new leaf
    draws its candidate features from ``rng`` once, when it is created.
    """
    n_features = X.shape[1]
    k = n_features if feature_subsample is None else min(int(feature_subsample), n_features)

    def candidates():
        if k >= n_features:
            return range(n_features)
        return np.sort(rng.choice(n_features, size=k, replace=False))

    feature, threshold, left, right, value = [-1], [np.nan], [-1], [-1], [_leaf_value(y)]
    rows = {0: np.arange(y.size)}
    frontier = {0: best_split(X[rows[0]], y[rows[0]], candidates())}
    n_leaves = 1
    while n_leaves < max_leaf_nodes:
        live = [(s[0], node) for node, s in frontier.items() if s is not None]
        if not live:
            break
        # max gain, earliest node on ties
        gain, node = max(live, key=lambda t: (t[0], -t[1]))
        _, f, thr = frontier.pop(node)
        idx = rows.pop(node)
        mask = X[idx, f] <= thr
        feature[node], threshold[node] = f, thr
        for side, sub in (("l", idx[mask]), ("r", idx[~mask])):
            child = len(feature)
            feature.append(-1)
            threshold.append(np.nan)
            left.append(-1)
            right.append(-1)
            value.append(_leaf_value(y[sub]))
            rows[child] = sub
            frontier[child] = best_split(X[sub], y[sub], candidates())
            if side == "l":
                left[node] = child
            else:
                right[node] = child
        n_leaves += 1
    return Tree(
        np.asarray(feature, dtype=np.intp),
        np.asarray(threshold, dtype=float),
        np.asarray(left, dtype=np.intp),
        np.asarray(right, dtype=np.intp),
        np.asarray(value, dtype=float),
    )


class ForestModel(FittedModel):
    def __init__(self, spec, trees, x_mean, x_std, y_min, y_max):
        super().__init__(spec, x_mean, x_std)
        self.trees = trees
        self.y_range = (float(y_min), float(y_max))

    def _raw_predict(self, X):
        acc = np.zeros(X.shape[0])
        for tree in self.trees:
            acc += tree.predict(X)
        return np.clip(acc / len(self.trees), *self.y_range)


def _tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(tree_index)]))


def fit_random_forest(
    X, y, params: ForestParams | None = None, seed: int = 0, spec: ModelSpec | None = None, n_jobs: int = 1
) -> ForestModel:
    """Bagged best-first regression trees.

    Tree ``i`` draws its bootstrap rows and feature subsets from its own
    generator seeded by ``(seed, i)``, so the forest is identical for any
    ``n_jobs``.
    """
    X, y = check_design(X, y, min_rows=2)
    params = params or (spec.rf_params if spec is not None else ForestParams())
    if spec is None:
        spec = ModelSpec("random_forest", rf_params=params, seed=seed)
    n = y.size

    def one(i):
        rng = _tree_rng(seed, i)
        idx = rng.integers(0, n, size=n) if params.bootstrap else np.arange(n)
        return grow_tree(X[idx], y[idx], params.max_leaf_nodes, params.feature_subsample, rng)

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(one, range(params.n_trees)))
    else:
        trees = [one(i) for i in range(params.n_trees)]
    mu, sd = standardization(X)
    return ForestModel(spec, trees, mu, sd, y.min(), y.max())
