"""Decoding aggregated scores into binary label vectors.

Sign decoding thresholds each score at zero with sign(0) = -1.  Known
vector decoding returns the label vector, among those observed in the
training data, that minimizes the example-wise logistic loss against the
scores; ties go to the earliest vector in training order.  Models trained
with the label-wise loss default to sign decoding, models trained with
the example-wise loss default to known-vector decoding.
"""

from __future__ import annotations

import numpy as np

from .losses import EXAMPLE_WISE_LOGISTIC

DECODE_SIGN = "sign"
DECODE_KNOWN_VECTORS = "known-vectors"
DECODE_METHODS = (DECODE_SIGN, DECODE_KNOWN_VECTORS)


def default_decode_method(loss_id: str) -> str:
    return DECODE_KNOWN_VECTORS if loss_id == EXAMPLE_WISE_LOGISTIC else DECODE_SIGN


def predict_sign(scores: np.ndarray) -> np.ndarray:
    """Element-wise sign with sign(0) = -1."""
    scores = np.asarray(scores)
    if np.isnan(scores).any():
        raise ValueError("scores contain NaN")
    return np.where(scores > 0.0, 1, -1).astype(np.int8)


def _known_vector_losses(score_matrix: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Example-wise logistic loss of every candidate, shape (n, n_candidates)."""
    z = -score_matrix[:, None, :] * candidates[None, :, :]
    shift = np.maximum(z.max(axis=2), 0.0)
    total = np.exp(-shift) + np.exp(z - shift[:, :, None]).sum(axis=2)
    return shift + np.log(total)


def predict_known_vectors(score_matrix: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Loss-minimizing known label vector per row of the score matrix."""
    candidates = np.asarray(candidates)
    if candidates.ndim != 2 or candidates.shape[0] == 0:
        raise ValueError("candidate label vectors must be a non-empty matrix")
    score_matrix = np.atleast_2d(np.asarray(score_matrix, dtype=np.float64))
    if np.isnan(score_matrix).any():
        raise ValueError("scores contain NaN")
    losses = _known_vector_losses(score_matrix, candidates.astype(np.float64))
    best = np.argmin(losses, axis=1)  # first occurrence wins ties
    return candidates[best].astype(np.int8)


def predict_known_vector(scores: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Single-example convenience wrapper around predict_known_vectors."""
    return predict_known_vectors(np.asarray(scores)[None, :], candidates)[0]


def decode_scores(score_matrix: np.ndarray, method: str, candidates=None) -> np.ndarray:
    if method == DECODE_SIGN:
        return predict_sign(score_matrix)
    if method == DECODE_KNOWN_VECTORS:
        if candidates is None:
            raise ValueError("known-vector decoding needs candidate label vectors")
        return predict_known_vectors(score_matrix, candidates)
    raise ValueError(f"unknown decode method {method!r}; expected one of {DECODE_METHODS}")
