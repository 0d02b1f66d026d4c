"""L2-regularized logistic regression, full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import check_training_inputs, check_width, matrix_values, sigmoid
from .config import ClassifierConfig


@dataclass(frozen=True)
class LogisticModel:
    kind = "lr"
    config: ClassifierConfig
    weights: np.ndarray
    intercept: float

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def raw_scores(self, X) -> np.ndarray:
        values = matrix_values(X)
        check_width(values, self.n_features)
        return values @ self.weights + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.raw_scores(X))

    def payload(self) -> dict:
        return {"weights": self.weights.tolist(), "intercept": self.intercept}

    @classmethod
    def from_payload(cls, config: ClassifierConfig, doc: dict) -> "LogisticModel":
        return cls(config=config, weights=np.asarray(doc["weights"], dtype=np.float64),
                   intercept=float(doc["intercept"]))


def objective(config, params, X, labels, weights=None):
    """Weighted-mean log loss plus l2 * ||w||^2 (intercept unpenalized)."""
    values, y, w = check_training_inputs(X, labels, weights)
    wvec, b = _unpack(params, values.shape[1])
    z = values @ wvec + b
    # log loss = -y log p - (1-y) log(1-p) = softplus(z) - y z
    loss = np.logaddexp(0.0, z) - y * z
    return float(w @ loss + config.l2 * wvec @ wvec)


def gradient(config, params, X, labels, weights=None):
    values, y, w = check_training_inputs(X, labels, weights)
    wvec, b = _unpack(params, values.shape[1])
    p = sigmoid(values @ wvec + b)
    r = w * (p - y)
    grad_w = values.T @ r + 2.0 * config.l2 * wvec
    grad_b = r.sum()
    return np.concatenate([grad_w, [grad_b]])


def _unpack(params, d):
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (d + 1,):
        raise ValueError(f"expected {d + 1} parameters (weights + intercept), got {params.shape}")
    return params[:d], params[d]


def fit(config: ClassifierConfig, X, labels, weights=None) -> LogisticModel:
    values, y, w = check_training_inputs(X, labels, weights)
    d = values.shape[1]
    wvec = np.zeros(d)
    b = 0.0
    lr = config.learning_rate
    for _ in range(config.epochs):
        p = sigmoid(values @ wvec + b)
        r = w * (p - y)
        wvec = wvec - lr * (values.T @ r + 2.0 * config.l2 * wvec)
        b = b - lr * r.sum()
    if not (np.all(np.isfinite(wvec)) and np.isfinite(b)):
        raise ValueError(
            "logistic training diverged (non-finite parameters); lower the learning rate"
        )
    return LogisticModel(config=config, weights=wvec, intercept=float(b))
