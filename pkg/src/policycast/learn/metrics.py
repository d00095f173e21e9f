import numpy as np


def accuracy(y_true, y_pred) -> float:
    """Fraction of exact matches (true positives plus true negatives over n)."""
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise ValueError("empty input")
    for v in (y_true, y_pred):
        if not np.isin(v, (0, 1)).all():
            raise ValueError("accuracy expects binary labels")
    return int(np.count_nonzero(y_true == y_pred)) / y_true.size


def r_squared(y_true, y_pred) -> float:
    """Coefficient of determination ``1 - SS_res / SS_tot``; negative when worse than the mean."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size < 2:
        raise ValueError("r_squared needs at least two observations")
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("r_squared undefined: y_true is constant (SS_tot = 0)")
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    return 1.0 - ss_res / ss_tot
