"""Shared input validation and numeric helpers for the classifiers."""

from __future__ import annotations

import numpy as np

from ..data import EncodedMatrix


class TrainingError(ValueError):
    """Raised for inputs no classifier can be fitted on."""


def sigmoid(z: np.ndarray) -> np.ndarray:
    # Branch on sign to stay overflow-free for large |z|.
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = -np.log1p(np.exp(-z[pos]))
    out[~pos] = z[~pos] - np.log1p(np.exp(z[~pos]))
    return out


def matrix_values(X) -> np.ndarray:
    """Accept an EncodedMatrix or a plain 2-D array; return validated float64."""
    if isinstance(X, EncodedMatrix):
        return X.values
    v = np.ascontiguousarray(X, dtype=np.float64)
    if v.ndim != 2:
        raise TrainingError(f"expected a 2-D design matrix, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise TrainingError("design matrix contains non-finite values")
    return v


def check_training_inputs(X, labels, weights=None):
    """Validate and normalize (X, y, weights) for fitting.

    Returns (values, y, w) with w summing to 1 (uniform when absent).
    """
    values = matrix_values(X)
    y = np.asarray(labels)
    if y.ndim != 1 or len(y) != values.shape[0]:
        raise TrainingError(
            f"labels length {y.shape} does not match {values.shape[0]} rows"
        )
    if y.size and not np.isin(y, (0, 1)).all():
        raise TrainingError("labels must be a 0/1 vector")
    y = y.astype(np.float64)
    if len(np.unique(y)) < 2:
        raise TrainingError("both classes must be present in the training labels")
    if weights is None:
        w = np.full(len(y), 1.0 / len(y))
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != y.shape:
            raise TrainingError("weights must match the number of rows")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise TrainingError("weights must be finite and non-negative")
        total = w.sum()
        if total <= 0:
            raise TrainingError("weights must have positive sum")
        w = w / total
    return values, y, w


def check_width(values: np.ndarray, n_features: int) -> None:
    if values.shape[1] != n_features:
        raise TrainingError(
            f"matrix width {values.shape[1]} does not match model width {n_features}"
        )
