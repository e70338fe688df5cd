"""Forecast quality metrics on the normalized scale."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import StackedNetwork, forward_batch


@dataclass
class EvalReport:
    mse: float
    mae: float
    n: int
    predictions: np.ndarray
    targets: np.ndarray


def _check_pair(y, yhat):
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape or y.ndim != 1:
        raise ValueError(f"metric inputs must be equal-length vectors, got {y.shape} vs {yhat.shape}")
    if y.shape[0] == 0:
        raise ValueError("metric inputs are empty")
    return y, yhat


def mse(y, yhat) -> float:
    """Mean of squared errors."""
    y, yhat = _check_pair(y, yhat)
    return float(np.mean((y - yhat) ** 2))


def mae(y, yhat) -> float:
    """Mean of absolute errors."""
    y, yhat = _check_pair(y, yhat)
    return float(np.mean(np.abs(y - yhat)))


def evaluate(net: StackedNetwork, test) -> EvalReport:
    """Forecast every test window and aggregate MSE/MAE (normalized scale)."""
    if len(test) == 0:
        raise ValueError("test set is empty")
    predictions, _ = forward_batch(net, test.inputs, want_trace=False)
    return EvalReport(
        mse=mse(test.targets, predictions),
        mae=mae(test.targets, predictions),
        n=len(test),
        predictions=predictions,
        targets=test.targets,
    )
