"""Group fairness metrics: demographic parity, equality of opportunity.

A metric whose denominator group is empty raises UndefinedMetric when called
standalone; ``report`` converts that into a flag so sweeps never crash on a
degenerate repetition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class UndefinedMetric(ValueError):
    """A group needed by the metric is empty."""


def _bits(name, v, n=None):
    a = np.asarray(v)
    if a.ndim != 1:
        raise ValueError(f"{name} must be a 1-D bit vector")
    if n is not None and len(a) != n:
        raise ValueError(f"{name} has length {len(a)}, expected {n}")
    if a.size and not np.isin(a, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1")
    return a.astype(np.int8)


def demographic_parity(yhat, s) -> float:
    """|P(yhat=1 | s=1) - P(yhat=1 | s=0)| with empirical frequencies."""
    yhat = _bits("yhat", yhat)
    s = _bits("s", s, len(yhat))
    rates = []
    for g in (1, 0):
        mask = s == g
        if not mask.any():
            raise UndefinedMetric(f"no rows with s={g}")
        rates.append(np.count_nonzero(yhat[mask]) / np.count_nonzero(mask))
    return abs(rates[0] - rates[1])


def equality_of_opportunity(yhat, y, s) -> float:
    """|TPR(s=1) - TPR(s=0)|."""
    yhat = _bits("yhat", yhat)
    y = _bits("y", y, len(yhat))
    s = _bits("s", s, len(yhat))
    tprs = []
    for g in (1, 0):
        mask = (s == g) & (y == 1)
        if not mask.any():
            raise UndefinedMetric(f"no positive rows with s={g}")
        tprs.append(np.count_nonzero(yhat[mask]) / np.count_nonzero(mask))
    return abs(tprs[0] - tprs[1])


@dataclass(frozen=True)
class FairnessReport:
    accuracy: float
    dp: float | None
    eop: float | None
    group_counts: np.ndarray  # (2, 2, 2) indexed [s, y, yhat]
    undefined: tuple[str, ...]

    @property
    def n(self) -> int:
        return int(self.group_counts.sum())


def report(yhat, y, s) -> FairnessReport:
    """Accuracy, both fairness gaps and the full (s, y, yhat) count table in
    one pass; undefined metrics are flagged, never NaN."""
    yhat = _bits("yhat", yhat)
    y = _bits("y", y, len(yhat))
    s = _bits("s", s, len(yhat))
    cell = (s.astype(np.int64) << 2) | (y.astype(np.int64) << 1) | yhat
    counts = np.bincount(cell, minlength=8).reshape(2, 2, 2)
    accuracy = float(np.count_nonzero(yhat == y) / len(y)) if len(y) else 0.0
    undefined = []
    try:
        dp = demographic_parity(yhat, s)
    except UndefinedMetric:
        dp = None
        undefined.append("dp")
    try:
        eop = equality_of_opportunity(yhat, y, s)
    except UndefinedMetric:
        eop = None
        undefined.append("eop")
    return FairnessReport(
        accuracy=accuracy, dp=dp, eop=eop, group_counts=counts,
        undefined=tuple(undefined),
    )
