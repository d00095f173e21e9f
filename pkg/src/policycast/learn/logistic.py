from dataclasses import dataclass

import numpy as np


class SingleClassError(ValueError):
    pass


@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray
    intercept: float
    tolerance: float
    max_iterations: int
    iterations: int
    converged: bool

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.weights.size:
            raise ValueError(f"expected {self.weights.size} features, got {X.shape[1]}")
        return _expit(X @ self.weights + self.intercept)

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) > 0.5).astype(np.int64)


def _expit(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _loglik(z, y):
    return float(np.sum(y * z - np.logaddexp(0.0, z)))


def train_logistic(X, y, tolerance=1e-6, max_iterations=10_000) -> LogisticModel:
    """Maximum-likelihood logistic regression by Newton ascent from zero.

    Steps are minimum-norm least-squares solutions of the Newton system, so the
    iterate stays in the row space of the design (as plain gradient ascent
    would) and collinear one-hot groups do not break the solve.  Stops once the
    log-likelihood gradient norm is at most ``tolerance``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] < 2:
        raise ValueError("need at least two training rows")
    if np.unique(y).size < 2:
        raise SingleClassError(
            "training labels contain a single class; use the majority-class baseline instead"
        )
    A = np.hstack([np.ones((X.shape[0], 1)), X])
    beta = np.zeros(A.shape[1])
    z = A @ beta
    ll = _loglik(z, y)
    it, converged = 0, False
    while it < max_iterations:
        p = _expit(z)
        grad = A.T @ (y - p)
        if np.linalg.norm(grad) <= tolerance:
            converged = True
            break
        H = (A * (p * (1.0 - p))[:, None]).T @ A
        step = np.linalg.lstsq(H, grad, rcond=None)[0]
        t = 1.0
        while True:
            cand = beta + t * step
            z_c = A @ cand
            ll_c = _loglik(z_c, y)
            if ll_c >= ll or t < 1e-10:
                break
            t *= 0.5
        it += 1
        if ll_c < ll:
            # no ascent left at machine precision; reported as not converged
            break
        beta, z, ll = cand, z_c, ll_c
    return LogisticModel(beta[1:].copy(), float(beta[0]), tolerance, max_iterations, it, converged)
