"""Random forests over binary features.

Every split tests a single 0/1 feature (left branch = 0, right branch = 1).
Classification trees grow on Gini impurity, regression trees on squared
error; feature importance is the normalised total impurity decrease.
"""
import math
from dataclasses import dataclass, field

import numpy as np

LEAF = -1


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray  # LEAF for leaves
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    importance: np.ndarray  # raw impurity decrease per feature

    def apply(self, X) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            inner = f != LEAF
            if not inner.any():
                return node
            r, n = rows[inner], node[inner]
            go_right = X[r, f[inner]] > 0.5
            node[inner] = np.where(go_right, self.right[n], self.left[n])

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.feature == LEAF))


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[Tree, ...]
    mode: str
    max_depth: int | None
    n_features: int
    features_per_split: int
    importance: np.ndarray = field(repr=False)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def _check(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def predict_value(self, X) -> np.ndarray:
        """Mean leaf value over trees: vote share for classifiers, mean target for regressors."""
        X = self._check(X)
        return np.mean([t.predict(X) for t in self.trees], axis=0)

    def predict_proba(self, X) -> np.ndarray:
        if self.mode != "classifier":
            raise ValueError("predict_proba needs a classification forest")
        return self.predict_value(X)

    def predict(self, X) -> np.ndarray:
        v = self.predict_value(X)
        if self.mode == "classifier":
            return (v > 0.5).astype(np.int64)
        return v


def _impurity_decrease(mode, n, s, n_r, s_r):
    """Weighted impurity decrease for candidate splits.

    ``n, s`` are the count and target sum at the node; ``n_r, s_r`` hold the
    same quantities on the right child of each candidate feature.
    """
    n_l, s_l = n - n_r, s - s_r
    valid = (n_r > 0) & (n_l > 0)
    nr, nl = np.maximum(n_r, 1), np.maximum(n_l, 1)
    if mode == "classifier":
        # n * gini = 2 * s * (n - s) / n
        gain = 2.0 * (s * (n - s) / n - s_r * (n_r - s_r) / nr - s_l * (n_l - s_l) / nl)
    else:
        # SSE = sum(y^2) - s^2 / n; the sum(y^2) terms cancel
        gain = s_r**2 / nr + s_l**2 / nl - s**2 / n
    gain = np.where(valid, gain, -np.inf)
    return gain


def grow_tree(X, y, rng, mode="classifier", max_depth=None, features_per_split=None,
              min_samples_split=2):
    n_total, d = X.shape
    k = features_per_split or d
    feature, left, right, value = [], [], [], []
    importance = np.zeros(d)

    def leaf_value(idx):
        if mode == "classifier":
            pos = int(np.count_nonzero(y[idx]))
            return 1.0 if 2 * pos > idx.size else 0.0  # ties go to the negative class
        return float(y[idx].mean())

    def new_node():
        feature.append(LEAF)
        left.append(LEAF)
        right.append(LEAF)
        value.append(0.0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(n_total), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yi = y[idx]
        value[node] = leaf_value(idx)
        n = idx.size
        if n < min_samples_split or (max_depth is not None and depth >= max_depth):
            continue
        s = float(yi.sum())
        if mode == "classifier" and (s == 0 or s == n):
            continue
        if mode == "regressor" and np.all(yi == yi[0]):
            continue
        Xi = X[idx]
        n_r_all = Xi.sum(axis=0)
        informative = (n_r_all > 0) & (n_r_all < n)
        # visit features in random order, keeping the first k that can split the node
        order = rng.permutation(d)
        cand = np.sort(order[informative[order]][:k])
        if cand.size == 0:
            continue
        n_r = n_r_all[cand]
        s_r = yi @ Xi[:, cand]
        gain = _impurity_decrease(mode, n, s, n_r, s_r)
        best = int(np.argmax(gain))  # first maximum: lowest feature index wins ties
        if not gain[best] > 1e-12:
            continue
        f = int(cand[best])
        importance[f] += gain[best]
        mask = Xi[:, f] > 0.5
        l_node, r_node = new_node(), new_node()
        feature[node], left[node], right[node] = f, l_node, r_node
        stack.append((r_node, idx[mask], depth + 1))
        stack.append((l_node, idx[~mask], depth + 1))

    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.float64),
        importance,
    )


def default_features_per_split(d: int) -> int:
    return max(1, math.ceil(math.sqrt(d)))


def train_forest(X, y, n_trees=100, max_depth=None, features_per_split=None, seed=0,
                 mode="classifier", bootstrap=True, rng=None) -> ForestModel:
    """Train a forest of bootstrap trees.  ``rng`` overrides ``seed`` when given."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if mode not in ("classifier", "regressor"):
        raise ValueError(f"unknown forest mode {mode!r}")
    n, d = X.shape
    if n < 2:
        raise ValueError("need at least two training rows")
    if max_depth is not None and max_depth < 1:
        raise ValueError("max_depth must be a positive integer or None")
    k = features_per_split or default_features_per_split(d)
    rng = rng if rng is not None else np.random.default_rng(seed)
    trees = []
    for _ in range(n_trees):
        rows = rng.integers(0, n, n) if bootstrap else np.arange(n)
        trees.append(grow_tree(X[rows], y[rows], rng, mode, max_depth, k))
    return ForestModel(tuple(trees), mode, max_depth, d, k, _forest_importance(trees, d))


def _forest_importance(trees, d) -> np.ndarray:
    per_tree = []
    for t in trees:
        total = t.importance.sum()
        per_tree.append(t.importance / total if total > 0 else np.zeros(d))
    imp = np.mean(per_tree, axis=0) if per_tree else np.zeros(d)
    return imp


def gini_importance(model: ForestModel) -> np.ndarray:
    """Normalised mean impurity decrease per feature (sums to 1).

    A forest in which no tree ever split carries no ranking information and is
    reported as uniform.
    """
    if not isinstance(model, ForestModel) or not model.trees:
        raise ValueError("gini_importance needs a trained forest")
    imp = model.importance
    total = imp.sum()
    if total <= 0:
        return np.full(model.n_features, 1.0 / model.n_features)
    return imp / total
