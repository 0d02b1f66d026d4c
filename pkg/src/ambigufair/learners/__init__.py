"""Binary classifiers sharing one contract: fit, predict_proba, predict.

All three kinds train with deterministic full-batch updates, accept optional
per-sample weights that multiply each loss term, and expose the analytic
gradient of their training objective for finite-difference checks.
"""

from __future__ import annotations

import json

import numpy as np

from . import gbdt, logistic, svm
from .common import TrainingError
from .config import DEFAULTS_VERSION, KINDS, ClassifierConfig, default_config
from .gbdt import BoostedTreesModel
from .logistic import LogisticModel
from .svm import LinearSVMModel

__all__ = [
    "ClassifierConfig",
    "default_config",
    "fit",
    "predict",
    "predict_proba",
    "loss_value",
    "loss_gradient",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
    "TrainingError",
    "KINDS",
    "DEFAULTS_VERSION",
]

MODEL_FORMAT_VERSION = 1

_MODULES = {"lr": logistic, "svm": svm, "gbdt": gbdt}
_MODEL_CLASSES = {"lr": LogisticModel, "svm": LinearSVMModel, "gbdt": BoostedTreesModel}


def fit(config: ClassifierConfig, X, labels, weights=None):
    return _MODULES[config.kind].fit(config, X, labels, weights)


def predict_proba(model, X) -> np.ndarray:
    return model.predict_proba(X)


def predict(model, X) -> np.ndarray:
    """Hard labels; the 0.5 tie goes to the positive class."""
    return (model.predict_proba(X) >= 0.5).astype(np.int8)


def loss_value(config: ClassifierConfig, parameters, X, labels, weights=None) -> float:
    return _MODULES[config.kind].objective(config, parameters, X, labels, weights)


def loss_gradient(config: ClassifierConfig, parameters, X, labels, weights=None) -> np.ndarray:
    return _MODULES[config.kind].gradient(config, parameters, X, labels, weights)


def model_to_dict(model) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "config": model.config.to_dict(),
        "params": model.payload(),
    }


def model_from_dict(doc: dict):
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format: {doc.get('format_version')!r}")
    config = ClassifierConfig.from_dict(doc["config"])
    return _MODEL_CLASSES[doc["kind"]].from_payload(config, doc["params"])


def save_model(model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
