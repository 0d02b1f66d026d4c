"""Pure-NumPy histogram and tree-traversal kernels.

Fallback used when the compiled extension is unavailable. Both backends
accumulate in the same (sample-major, feature-minor) order, so results are
bit-identical between them.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def build_histograms(codes, idx, grad, hess, n_bins):
    """Sum gradients/hessians and count samples per (feature, bin).

    codes: (n, d) int32 binned matrix; idx: int64 row subset; grad/hess:
    per-sample float64 (full length). Returns (d, n_bins) float64 sums and an
    int64 count array.
    """
    sub = codes[idx]
    m, d = sub.shape
    flat = (sub + np.arange(d, dtype=np.int32) * np.int32(n_bins)).ravel()
    size = d * n_bins
    hist_g = np.bincount(flat, weights=np.repeat(grad[idx], d), minlength=size)
    hist_h = np.bincount(flat, weights=np.repeat(hess[idx], d), minlength=size)
    hist_n = np.bincount(flat, minlength=size)
    return (
        hist_g.reshape(d, n_bins),
        hist_h.reshape(d, n_bins),
        hist_n.reshape(d, n_bins).astype(np.int64),
    )


def predict_tree(codes, feature, split_bin, left, right, value, out):
    """Route every row of ``codes`` to its leaf and add the leaf value to ``out``."""
    n = codes.shape[0]
    node = np.zeros(n, dtype=np.int32)
    active = np.flatnonzero(feature[node] >= 0)
    while active.size:
        nd = node[active]
        f = feature[nd]
        goes_left = codes[active, f] <= split_bin[nd]
        node[active] = np.where(goes_left, left[nd], right[nd])
        active = active[feature[node[active]] >= 0]
    out += value[node]
    return out
