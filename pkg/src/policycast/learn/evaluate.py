"""Repeated k-fold cross-validation and importance summaries."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .._parallel import run_trials
from .._rng import trial_rng
from .data import Dataset
from .forest import ForestModel, gini_importance, train_forest
from .lasso import LassoModel, train_lasso
from .logistic import LogisticModel, train_logistic
from .metrics import accuracy, r_squared

CLASSIFIERS = ("logistic", "forest")
REGRESSORS = ("lasso", "forest_regressor")


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in CLASSIFIERS + REGRESSORS:
            raise ValueError(f"unknown model kind {self.kind!r}")

    @property
    def is_classifier(self) -> bool:
        return self.kind in CLASSIFIERS

    def fit(self, X, y, rng):
        p = self.params
        if self.kind == "logistic":
            return train_logistic(X, y, p.get("tolerance", 1e-6), p.get("max_iterations", 10_000))
        if self.kind == "lasso":
            return train_lasso(X, y, p.get("lam", 0.056), p.get("tolerance", 1e-8))
        mode = "classifier" if self.kind == "forest" else "regressor"
        return train_forest(
            X, y,
            n_trees=p.get("n_trees", 100),
            max_depth=p.get("max_depth"),
            features_per_split=p.get("features_per_split"),
            mode=mode,
            rng=rng,
        )


def predict(model, x) -> np.ndarray | float:
    """Probability (classifiers) or real value (regressors) for one or more rows."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if isinstance(model, LogisticModel):
        out = model.predict_proba(X)
    elif isinstance(model, ForestModel):
        out = model.predict_value(X)
    elif isinstance(model, LassoModel):
        out = model.predict(X)
    else:
        raise TypeError(f"cannot predict with {type(model).__name__}")
    return float(out[0]) if single else out


def top_k_frequency(importances, k: int = 5):
    """Frequency with which each feature ranks in the per-trial top ``k``.

    ``importances`` is a ``trials x d`` matrix.  Ranking ties go to the lower
    feature index.  Returns ``(frequency, threshold)`` where ``threshold`` is
    the chance level ``sum_{i<k} 1/(d - i)``.
    """
    imp = np.atleast_2d(np.asarray(importances, dtype=float))
    trials, d = imp.shape
    if trials < 1:
        raise ValueError("need at least one trial")
    if k > d:
        raise ValueError(f"k={k} exceeds number of features d={d}")
    top = np.argsort(-imp, axis=1, kind="stable")[:, :k]
    counts = np.zeros(d)
    for row in top:
        counts[row] += 1
    return counts / trials, significance_threshold(d, k)


def significance_threshold(d: int, k: int = 5) -> float:
    return math.fsum(1.0 / (d - i) for i in range(k))


@dataclass(frozen=True)
class EvalReport:
    metric: str
    scores: np.ndarray
    feature_names: tuple[str, ...]
    importances: np.ndarray | None = None  # trials x d, forests only
    predictions: np.ndarray | None = None  # trials x n held-out predictions

    @property
    def mean(self) -> float:
        return float(np.mean(self.scores))

    @property
    def p05(self) -> float:
        return float(np.percentile(self.scores, 5))

    @property
    def p95(self) -> float:
        return float(np.percentile(self.scores, 95))

    @property
    def per_feature_importance(self) -> np.ndarray | None:
        return None if self.importances is None else self.importances.mean(axis=0)

    def top_k(self, k: int = 5):
        if self.importances is None:
            return None, None
        return top_k_frequency(self.importances, k)

    def to_dict(self) -> dict:
        freq, thresh = self.top_k(5)
        names = self.feature_names
        imp = self.per_feature_importance
        return {
            "trials": [float(s) for s in self.scores],
            "mean": self.mean,
            "p05": self.p05,
            "p95": self.p95,
            "per_feature_importance": None if imp is None else dict(zip(names, map(float, imp))),
            "top5_frequency": None if freq is None else dict(zip(names, map(float, freq))),
            "significance_threshold": thresh,
        }


def _run_trial(spec: ModelSpec, X, y, folds: int, seed: int, trial: int):
    rng = trial_rng(seed, trial, "cv")
    n = X.shape[0]
    perm = rng.permutation(n)
    pred = np.empty(n, dtype=float)
    imps = []
    for test in np.array_split(perm, folds):
        train = np.setdiff1d(perm, test, assume_unique=True)
        model = spec.fit(X[train], y[train], rng)
        if spec.is_classifier:
            pred[test] = model.predict(X[test])
        else:
            pred[test] = predict(model, X[test])
        if isinstance(model, ForestModel):
            imps.append(gini_importance(model))
    score = accuracy(y, pred.astype(np.int64)) if spec.is_classifier else r_squared(y, pred)
    imp = np.mean(imps, axis=0) if imps else None
    return score, imp, pred


def cross_validate(spec: ModelSpec, data: Dataset, folds: int = 4, trials: int = 1000,
                   seed: int = 0, workers: int = 1) -> EvalReport:
    """Repeat k-fold CV ``trials`` times with an independent random partition each time.

    Each trial's score is computed on the pooled held-out predictions, so every
    row is scored exactly once per trial.  Trial ``t`` draws from a stream
    derived from ``(seed, t)`` and results are identical for any ``workers``.
    """
    n = len(data)
    if folds < 2:
        raise ValueError("folds must be at least 2")
    if folds > n:
        raise ValueError(f"fold count {folds} exceeds number of rows {n}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    X = data.features.astype(float)
    y = data.targets
    results = run_trials(_run_trial, (spec, X, y, folds, seed), trials, workers)
    scores = np.array([r[0] for r in results])
    imps = None if results[0][1] is None else np.vstack([r[1] for r in results])
    preds = np.vstack([r[2] for r in results])
    metric = "accuracy" if spec.is_classifier else "r_squared"
    return EvalReport(metric, scores, data.feature_names, imps, preds)


def majority_baseline(y) -> float:
    """Accuracy of always predicting the more common class."""
    y = np.asarray(y)
    pos = np.count_nonzero(y)
    return max(pos, y.size - pos) / y.size


def lambda_grid(num: int = 25, low: float = 1e-4, high: float = 1.0) -> np.ndarray:
    return np.logspace(np.log10(low), np.log10(high), num)


def select_lambda(data: Dataset, grid=None, folds: int = 4, trials: int = 50, seed: int = 0,
                  workers: int = 1):
    """Pick the lasso penalty with the best mean CV R^2.  Returns ``(lam, means)``."""
    grid = lambda_grid() if grid is None else np.asarray(grid, dtype=float)
    means = [cross_validate(ModelSpec("lasso", {"lam": float(lam)}), data, folds, trials, seed,
                            workers).mean for lam in grid]
    return float(grid[int(np.argmax(means))]), np.array(means)


def select_max_depth(data: Dataset, depths=(1, 2, 3, 5, None), folds: int = 4, trials: int = 20,
                     seed: int = 0, workers: int = 1, n_trees: int = 100):
    """Pick the regression-forest depth with the best mean CV R^2.  Returns ``(depth, means)``."""
    means = [cross_validate(ModelSpec("forest_regressor", {"max_depth": dep, "n_trees": n_trees}),
                            data, folds, trials, seed, workers).mean for dep in depths]
    return depths[int(np.argmax(means))], np.array(means)
