"""Evaluation metrics over +-1 label matrices."""

from __future__ import annotations

import numpy as np


def _checked(y_true, y_pred):
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.ndim != 2:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    return y_true, y_pred


def hamming_loss(y_true, y_pred) -> float:
    """Fraction of wrong label entries."""
    y_true, y_pred = _checked(y_true, y_pred)
    return float(np.mean(y_true != y_pred))


def subset_zero_one_loss(y_true, y_pred) -> float:
    """Fraction of examples with at least one wrong label."""
    y_true, y_pred = _checked(y_true, y_pred)
    return float(np.mean(np.any(y_true != y_pred, axis=1)))


def example_based_f1(y_true, y_pred) -> float:
    """Mean per-example F1 over positive labels; two empty sets count as 1."""
    y_true, y_pred = _checked(y_true, y_pred)
    true_pos = ((y_true == 1) & (y_pred == 1)).sum(axis=1)
    denom = (y_true == 1).sum(axis=1) + (y_pred == 1).sum(axis=1)
    f1 = np.where(denom > 0, 2.0 * true_pos / np.maximum(denom, 1), 1.0)
    return float(np.mean(f1))


def evaluate_predictions(y_true, y_pred) -> dict:
    return {
        "hamming": hamming_loss(y_true, y_pred),
        "subset01": subset_zero_one_loss(y_true, y_pred),
        "example_f1": example_based_f1(y_true, y_pred),
    }
