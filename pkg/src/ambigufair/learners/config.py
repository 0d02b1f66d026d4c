"""Classifier configuration and the versioned default hyperparameters.

The defaults below are part of the artifact's reproducibility contract:
change them only together with DEFAULTS_VERSION.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

DEFAULTS_VERSION = 1

KINDS = ("lr", "svm", "gbdt")

# Full-batch deterministic optimizers; epochs/learning rates sized for
# z-scored numerics + 0/1 one-hot columns. Unregularized long runs let
# members interpolate small bootstrap samples (high ensemble disagreement on
# few-hundred-row pools) while converging calmly on tens of thousands of rows.
KIND_DEFAULTS = {
    "lr": dict(l2=0.0, learning_rate=1.0, epochs=800),
    "svm": dict(l2=0.0, learning_rate=0.2, epochs=800),
    "gbdt": dict(l2=1.0, learning_rate=0.1, n_trees=100, max_depth=3, n_bins=32),
}

# Fixed internals (not exposed as knobs).
MIN_SAMPLES_LEAF = 5
MIN_SPLIT_GAIN = 1e-12
BASE_RATE_CLAMP = 1e-6


@dataclass(frozen=True)
class ClassifierConfig:
    kind: str
    l2: float = 0.0
    learning_rate: float = 0.1
    epochs: int = 100
    n_trees: int = 100
    max_depth: int = 3
    n_bins: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown classifier kind {self.kind!r}; expected one of {KINDS}")
        if self.l2 < 0:
            raise ValueError(f"l2 must be >= 0, got {self.l2}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        # Zero epochs/trees are legal: they yield the untrained/base-rate model.
        if self.epochs < 0 or self.n_trees < 0:
            raise ValueError("epochs and n_trees must be >= 0")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.n_bins < 2:
            raise ValueError(f"n_bins must be > 1, got {self.n_bins}")

    def with_seed(self, seed: int) -> "ClassifierConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "l2": self.l2,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "n_bins": self.n_bins,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ClassifierConfig":
        return cls(**doc)


def default_config(kind: str, seed: int = 0, **overrides) -> ClassifierConfig:
    if kind not in KIND_DEFAULTS:
        raise ValueError(f"unknown classifier kind {kind!r}; expected one of {KINDS}")
    params = dict(KIND_DEFAULTS[kind])
    params.update(overrides)
    return ClassifierConfig(kind=kind, seed=seed, **params)
