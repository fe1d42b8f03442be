import numpy as np
from numpy.typing import ArrayLike


def msle_metric(y: ArrayLike, y_hat: ArrayLike) -> float:
    y, y_hat = np.asarray(y, dtype=np.float64), np.asarray(y_hat, dtype=np.float64)
    assert y.shape == y_hat.shape, f"shape mismatch {y.shape} vs {y_hat.shape}"
    if y.size == 0:
        return float("nan")
    return float(np.mean((np.log1p(y) - np.log1p(y_hat)) ** 2))


def mape_metric(y: ArrayLike, y_hat: ArrayLike) -> float:
    """Mean absolute percentage error (%) over entries with a positive target; NaN when there is none."""
    y, y_hat = np.asarray(y, dtype=np.float64), np.asarray(y_hat, dtype=np.float64)
    assert y.shape == y_hat.shape, f"shape mismatch {y.shape} vs {y_hat.shape}"
    positive = y > 0
    if not positive.any():
        return float("nan")
    return float(np.mean(np.abs(y[positive] - y_hat[positive]) / y[positive]) * 100.0)
