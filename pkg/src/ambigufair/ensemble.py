"""The attribute-classifier ensemble and its disagreement-based uncertainty.

Members are trained on bootstrap resamples of the (x, s) pool to predict the
sensitive bit; the ensemble score q estimates p(s=1|x) either as the fraction
of members voting 1 (default) or as the mean member probability. The
uncertainty of a point is u = 1 - max(q, 1 - q), maximal at q = 1/2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import learners
from .data import Dataset, EncodingParams, encode, fit_encoding
from .learners.common import check_width, matrix_values

VOTE = "vote"
MEAN_PROBABILITY = "mean-probability"
AGGREGATIONS = (VOTE, MEAN_PROBABILITY)

DEFAULT_MEMBERS = 50
MAX_BOOTSTRAP_REDRAWS = 100


class EnsembleError(ValueError):
    pass


@dataclass(frozen=True)
class NormBreakerEnsemble:
    members: tuple
    encoding: EncodingParams
    aggregation: str
    seed: int

    @property
    def n_members(self) -> int:
        return len(self.members)

    @property
    def n_features(self) -> int:
        return self.members[0].n_features


def nbe_fit(
    d1: Dataset,
    base: learners.ClassifierConfig,
    n_members: int = DEFAULT_MEMBERS,
    seed: int = 0,
    aggregation: str = VOTE,
    encoding: EncodingParams | None = None,
    bootstrap: bool = True,
) -> NormBreakerEnsemble:
    """Train ``n_members`` attribute classifiers on size-|d1| bootstrap
    resamples (with replacement) of d1, target s, features x only.

    ``bootstrap=False`` trains every member on d1 itself (test hook for
    degenerate-ensemble checks). A resample that lost one s-group entirely is
    redrawn a bounded number of times, then errors.
    """
    s = d1.require_s()
    if n_members < 1:
        raise EnsembleError(f"need at least one member, got {n_members}")
    if aggregation not in AGGREGATIONS:
        raise EnsembleError(f"unknown aggregation {aggregation!r}")
    if len(np.unique(s)) < 2:
        raise EnsembleError("both sensitive groups must be present in d1")
    if encoding is None:
        encoding = fit_encoding(d1)
    X = encode(d1, encoding)
    n = d1.n_rows
    members = []
    for child in np.random.SeedSequence(seed).spawn(n_members):
        rng = np.random.default_rng(child)
        member_seed = int(child.generate_state(1, np.uint32)[0])
        if bootstrap:
            for attempt in range(MAX_BOOTSTRAP_REDRAWS + 1):
                idx = rng.integers(0, n, size=n)
                if len(np.unique(s[idx])) == 2:
                    break
            else:
                raise EnsembleError(
                    f"bootstrap kept drawing single-group resamples "
                    f"({MAX_BOOTSTRAP_REDRAWS} redraws)"
                )
        else:
            idx = np.arange(n)
        members.append(
            learners.fit(base.with_seed(member_seed), X.values[idx], s[idx])
        )
    return NormBreakerEnsemble(
        members=tuple(members), encoding=encoding, aggregation=aggregation, seed=seed
    )


def ensemble_score(nbe: NormBreakerEnsemble, X) -> np.ndarray:
    """q = estimated p(s=1|x) per row: vote fraction or mean probability."""
    values = matrix_values(X)
    check_width(values, nbe.n_features)
    if nbe.aggregation == VOTE:
        votes = np.zeros(values.shape[0])
        for m in nbe.members:
            votes += (m.predict_proba(values) >= 0.5)
        return votes / nbe.n_members
    probs = np.zeros(values.shape[0])
    for m in nbe.members:
        probs += m.predict_proba(values)
    return probs / nbe.n_members


def uncertainty(q):
    """u = 1 - max(q, 1-q); in [0, 1/2], symmetric around q = 1/2."""
    arr = np.asarray(q, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("ensemble scores must lie in [0, 1]")
    u = 1.0 - np.maximum(arr, 1.0 - arr)
    return float(u) if np.isscalar(q) or arr.ndim == 0 else u


def score_dataset(nbe: NormBreakerEnsemble, data: Dataset) -> np.ndarray:
    return ensemble_score(nbe, encode(data, nbe.encoding))


def nbe_diagnostics(nbe: NormBreakerEnsemble, d2: Dataset, q: np.ndarray | None = None):
    """(mean uncertainty over d2, accuracy of the hard ensemble decision
    against d2's true s). The q >= 1/2 tie predicts s = 1."""
    s = d2.require_s()
    if q is None:
        q = score_dataset(nbe, d2)
    mean_u = float(np.mean(uncertainty(q)))
    shat = (q >= 0.5).astype(np.int8)
    acc = float(np.count_nonzero(shat == s) / len(s))
    return mean_u, acc


def ensemble_to_dict(nbe: NormBreakerEnsemble) -> dict:
    from .data import encoding_to_dict

    return {
        "aggregation": nbe.aggregation,
        "seed": nbe.seed,
        "encoding": encoding_to_dict(nbe.encoding),
        "members": [learners.model_to_dict(m) for m in nbe.members],
    }


def ensemble_from_dict(doc: dict) -> NormBreakerEnsemble:
    from .data import encoding_from_dict

    return NormBreakerEnsemble(
        members=tuple(learners.model_from_dict(m) for m in doc["members"]),
        encoding=encoding_from_dict(doc["encoding"]),
        aggregation=doc["aggregation"],
        seed=int(doc["seed"]),
    )


def save_ensemble(nbe: NormBreakerEnsemble, path) -> None:
    with open(path, "w") as fh:
        json.dump(ensemble_to_dict(nbe), fh, sort_keys=True)
        fh.write("\n")


def load_ensemble(path) -> NormBreakerEnsemble:
    with open(path) as fh:
        return ensemble_from_dict(json.load(fh))
