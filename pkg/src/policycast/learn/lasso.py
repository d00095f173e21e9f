from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LassoModel:
    weights: np.ndarray
    intercept: float
    lam: float
    sweeps: int

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.weights.size:
            raise ValueError(f"expected {self.weights.size} features, got {X.shape[1]}")
        return X @ self.weights + self.intercept


def soft_threshold(x, t):
    return np.sign(x) * max(abs(x) - t, 0.0)


def train_lasso(X, y, lam, tolerance=1e-8, max_sweeps=100_000) -> LassoModel:
    """Minimise ``SS_res / (2n) + lam * sum|w|`` by cyclic coordinate descent.

    The intercept is unpenalised (handled by centring).  Converged when the
    largest coordinate change in a full sweep is below ``tolerance``.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    x_mean, y_mean = X.mean(axis=0), y.mean()
    Xc, yc = X - x_mean, y - y_mean
    col_sq = (Xc**2).sum(axis=0) / n
    w = np.zeros(d)
    resid = yc.copy()
    sweeps = 0
    active = np.flatnonzero(col_sq > 0)
    while sweeps < max_sweeps:
        sweeps += 1
        max_delta = 0.0
        for j in active:
            old = w[j]
            rho = Xc[:, j] @ resid / n + col_sq[j] * old
            new = soft_threshold(rho, lam) / col_sq[j]
            if new != old:
                resid -= Xc[:, j] * (new - old)
                w[j] = new
                max_delta = max(max_delta, abs(new - old))
        if max_delta < tolerance:
            break
    return LassoModel(w, float(y_mean - x_mean @ w), float(lam), sweeps)


def lambda_max(X, y) -> float:
    """Smallest penalty at which every weight is exactly zero."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    Xc, yc = X - X.mean(axis=0), y - y.mean()
    return float(np.max(np.abs(Xc.T @ yc)) / X.shape[0]) if X.size else 0.0
