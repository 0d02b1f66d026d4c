"""Comparison interventions that assume full knowledge of the sensitive bit:
per-(s, y)-cell reweighing and group-specific decision thresholds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import _bits


@dataclass(frozen=True)
class GroupThresholds:
    """Decision thresholds for the s=0 and s=1 groups, clipped into [0, 1]
    (an unreachable threshold above 1 accepts only scores exactly 1)."""

    t0: float
    t1: float

    def __post_init__(self):
        object.__setattr__(self, "t0", min(max(float(self.t0), 0.0), 1.0))
        object.__setattr__(self, "t1", min(max(float(self.t1), 0.0), 1.0))


def reweigh(s, y) -> np.ndarray:
    """w_i = N_{s_i} * N_{y_i} / (N * N_{s_i, y_i}): expected over observed
    joint frequency. Makes the weighted (s, y) distribution factorize."""
    s = _bits("s", s)
    y = _bits("y", y, len(s))
    n = len(s)
    n_s = np.bincount(s, minlength=2)
    n_y = np.bincount(y, minlength=2)
    n_sy = np.bincount((s.astype(np.int64) << 1) | y, minlength=4).reshape(2, 2)
    weights = np.empty(n, dtype=np.float64)
    for g in (0, 1):
        for c in (0, 1):
            mask = (s == g) & (y == c)
            if mask.any():
                weights[mask] = (n_s[g] * n_y[c]) / (n * n_sy[g, c])
    return weights


def threshold_grid(grid_step: float) -> np.ndarray:
    if not 0.0 < grid_step <= 1.0:
        raise ValueError(f"grid_step must be in (0, 1], got {grid_step}")
    # Round away accumulated float drift so 0.01 yields exactly 0, 0.01, ..., 1.
    return np.round(np.arange(0.0, 1.0 + grid_step / 2.0, grid_step), 12)


def equalize_tpr_thresholds(scores, y, s, grid_step: float = 0.01) -> GroupThresholds:
    """Exhaustive search over the (t0, t1) grid minimizing the TPR gap on the
    given data; ties broken by higher accuracy, then by smaller (t0, t1)."""
    scores = np.asarray(scores, dtype=np.float64)
    y = _bits("y", y, len(scores))
    s = _bits("s", s, len(scores))
    for g in (0, 1):
        if not ((s == g) & (y == 1)).any():
            raise ValueError(f"group s={g} has no positive rows; TPR undefined")
    grid = threshold_grid(grid_step)
    m = len(grid)
    ge = scores[:, None] >= grid[None, :]  # (n, m)
    tpr = np.empty((2, m))
    correct = np.empty((2, m))
    for g in (0, 1):
        pos = (s == g) & (y == 1)
        tpr[g] = np.count_nonzero(ge[pos], axis=0) / np.count_nonzero(pos)
        in_g = s == g
        correct[g] = np.count_nonzero(ge[in_g] == (y[in_g] == 1)[:, None], axis=0)
    gap = np.abs(tpr[1][None, :] - tpr[0][:, None])  # [t0 index, t1 index]
    acc = (correct[0][:, None] + correct[1][None, :]) / len(y)
    order = np.lexsort(
        (
            np.broadcast_to(grid[None, :], gap.shape).ravel(),  # t1 ascending
            np.broadcast_to(grid[:, None], gap.shape).ravel(),  # t0 ascending
            -acc.ravel(),
            gap.ravel(),
        )
    )
    i0, i1 = divmod(int(order[0]), m)
    return GroupThresholds(t0=float(grid[i0]), t1=float(grid[i1]))


def apply_thresholds(scores, s, thresholds: GroupThresholds) -> np.ndarray:
    """yhat_i = 1 iff score_i >= t_{s_i}."""
    scores = np.asarray(scores, dtype=np.float64)
    s = _bits("s", s, len(scores))
    cut = np.where(s == 1, thresholds.t1, thresholds.t0)
    return (scores >= cut).astype(np.int8)
