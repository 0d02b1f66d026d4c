"""Linear SVM trained by subgradient descent on the mean hinge loss, with a
logistic (Platt-style) map fitted on training margins for probabilities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .common import check_training_inputs, check_width, matrix_values, sigmoid
from .config import ClassifierConfig


@dataclass(frozen=True)
class LinearSVMModel:
    kind = "svm"
    config: ClassifierConfig
    weights: np.ndarray
    intercept: float
    platt_a: float
    platt_b: float

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def raw_scores(self, X) -> np.ndarray:
        values = matrix_values(X)
        check_width(values, self.n_features)
        return values @ self.weights + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        # Classic orientation: p(y=1|f) = 1 / (1 + exp(a f + b)), a <= 0 when
        # larger margins favor the positive class.
        return sigmoid(-(self.platt_a * self.raw_scores(X) + self.platt_b))

    def payload(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "platt_a": self.platt_a,
            "platt_b": self.platt_b,
        }

    @classmethod
    def from_payload(cls, config: ClassifierConfig, doc: dict) -> "LinearSVMModel":
        return cls(
            config=config,
            weights=np.asarray(doc["weights"], dtype=np.float64),
            intercept=float(doc["intercept"]),
            platt_a=float(doc["platt_a"]),
            platt_b=float(doc["platt_b"]),
        )


def objective(config, params, X, labels, weights=None):
    """Weighted-mean hinge loss plus l2 * ||w||^2 (intercept unpenalized)."""
    values, y, w = check_training_inputs(X, labels, weights)
    wvec, b = _unpack(params, values.shape[1])
    t = 2.0 * y - 1.0
    margins = t * (values @ wvec + b)
    return float(w @ np.maximum(0.0, 1.0 - margins) + config.l2 * wvec @ wvec)


def gradient(config, params, X, labels, weights=None):
    """Subgradient of the hinge objective; the kink at margin 1 contributes 0."""
    values, y, w = check_training_inputs(X, labels, weights)
    wvec, b = _unpack(params, values.shape[1])
    t = 2.0 * y - 1.0
    margins = t * (values @ wvec + b)
    active = margins < 1.0
    r = np.where(active, -w * t, 0.0)
    grad_w = values.T @ r + 2.0 * config.l2 * wvec
    return np.concatenate([grad_w, [r.sum()]])


def _unpack(params, d):
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (d + 1,):
        raise ValueError(f"expected {d + 1} parameters (weights + intercept), got {params.shape}")
    return params[:d], params[d]


def fit(config: ClassifierConfig, X, labels, weights=None) -> LinearSVMModel:
    values, y, w = check_training_inputs(X, labels, weights)
    d = values.shape[1]
    wvec = np.zeros(d)
    b = 0.0
    t = 2.0 * y - 1.0
    lr = config.learning_rate
    # Constant-step subgradient descent on the last iterate (no averaging):
    # deterministic, and deliberately noisier than a smooth optimizer.
    for _ in range(config.epochs):
        margins = t * (values @ wvec + b)
        r = np.where(margins < 1.0, -w * t, 0.0)
        wvec = wvec - lr * (values.T @ r + 2.0 * config.l2 * wvec)
        b = b - lr * r.sum()
    if not (np.all(np.isfinite(wvec)) and np.isfinite(b)):
        raise ValueError(
            "svm training diverged (non-finite parameters); lower the learning rate"
        )
    scores = values @ wvec + b
    a, pb = fit_platt(scores, y, w)
    return LinearSVMModel(config=config, weights=wvec, intercept=float(b),
                          platt_a=a, platt_b=pb)


def fit_platt(scores, labels, weights=None, max_iter=100, min_step=1e-10,
              sigma=1e-12, tol=1e-5):
    """Fit (a, b) of p = 1/(1+exp(a f + b)) by Newton descent with backtracking.

    Uses the standard shrunk targets (N+1)/(N+2) and 1/(N+2) so the map never
    saturates; NLL terms carry the sample weights.
    """
    f = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if weights is None:
        w = np.full(len(y), 1.0 / len(y))
    else:
        w = np.asarray(weights, dtype=np.float64)
        w = w / w.sum()
    n1 = int(np.sum(y == 1))
    n0 = int(np.sum(y == 0))
    hi = (n1 + 1.0) / (n1 + 2.0)
    lo = 1.0 / (n0 + 2.0)
    target = np.where(y == 1, hi, lo)

    def nll(a, b):
        z = a * f + b
        # -t log p - (1-t) log(1-p) with p = sigmoid(-z)
        return float(w @ (target * z + np.logaddexp(0.0, -z)))

    a, b = 0.0, math.log((n0 + 1.0) / (n1 + 1.0))
    fval = nll(a, b)
    for _ in range(max_iter):
        z = a * f + b
        p = sigmoid(-z)
        q = 1.0 - p
        d2 = w * p * q
        h11 = float(f @ (f * d2)) + sigma
        h22 = float(d2.sum()) + sigma
        h21 = float(f @ d2)
        d1 = w * (target - p)
        g1 = float(f @ d1)
        g2 = float(d1.sum())
        if abs(g1) < tol and abs(g2) < tol:
            break
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        step = 1.0
        while step >= min_step:
            new_a, new_b = a + step * da, b + step * db
            new_f = nll(new_a, new_b)
            if new_f < fval + 1e-4 * step * gd:
                a, b, fval = new_a, new_b, new_f
                break
            step /= 2.0
        else:
            break
    return float(a), float(b)
