"""Histogram gradient-boosted trees with logistic loss.

Leaf-wise, depth-limited growth on per-feature quantile bins; split gains and
leaf values use second-order (gradient/hessian) statistics. The histogram and
traversal inner loops go through the kernels backend.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from .common import check_training_inputs, check_width, matrix_values, sigmoid
from .config import BASE_RATE_CLAMP, MIN_SAMPLES_LEAF, MIN_SPLIT_GAIN, ClassifierConfig


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray  # int32; -1 marks a leaf
    split_bin: np.ndarray  # int32; code <= split_bin routes left
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # float64; leaf contribution, shrinkage included

    def payload(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "split_bin": self.split_bin.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_payload(cls, doc: dict) -> "Tree":
        return cls(
            feature=np.asarray(doc["feature"], dtype=np.int32),
            split_bin=np.asarray(doc["split_bin"], dtype=np.int32),
            left=np.asarray(doc["left"], dtype=np.int32),
            right=np.asarray(doc["right"], dtype=np.int32),
            value=np.asarray(doc["value"], dtype=np.float64),
        )


@dataclass(frozen=True)
class BoostedTreesModel:
    kind = "gbdt"
    config: ClassifierConfig
    cuts: tuple[np.ndarray, ...]
    base_score: float
    trees: tuple[Tree, ...]

    @property
    def n_features(self) -> int:
        return len(self.cuts)

    def raw_scores(self, X) -> np.ndarray:
        values = matrix_values(X)
        check_width(values, self.n_features)
        codes = bin_matrix(values, self.cuts)
        out = np.full(values.shape[0], self.base_score)
        for tree in self.trees:
            kernels.predict_tree(
                codes, tree.feature, tree.split_bin, tree.left, tree.right, tree.value, out
            )
        return out

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.raw_scores(X))

    def payload(self) -> dict:
        return {
            "cuts": [c.tolist() for c in self.cuts],
            "base_score": self.base_score,
            "trees": [t.payload() for t in self.trees],
        }

    @classmethod
    def from_payload(cls, config: ClassifierConfig, doc: dict) -> "BoostedTreesModel":
        return cls(
            config=config,
            cuts=tuple(np.asarray(c, dtype=np.float64) for c in doc["cuts"]),
            base_score=float(doc["base_score"]),
            trees=tuple(Tree.from_payload(t) for t in doc["trees"]),
        )


def compute_cuts(values: np.ndarray, n_bins: int) -> tuple[np.ndarray, ...]:
    """Per-feature cut points: midpoints of unique values when few, interior
    quantiles otherwise. At most n_bins - 1 cuts, so codes fit in n_bins."""
    cuts = []
    for j in range(values.shape[1]):
        col = values[:, j]
        uniq = np.unique(col)
        if len(uniq) <= 1:
            cuts.append(np.empty(0, dtype=np.float64))
        elif len(uniq) <= n_bins:
            cuts.append((uniq[:-1] + uniq[1:]) / 2.0)
        else:
            qs = np.quantile(col, np.linspace(0.0, 1.0, n_bins + 1)[1:-1])
            cuts.append(np.unique(qs))
    return tuple(cuts)


def bin_matrix(values: np.ndarray, cuts) -> np.ndarray:
    codes = np.empty(values.shape, dtype=np.int32, order="C")
    for j, c in enumerate(cuts):
        codes[:, j] = np.searchsorted(c, values[:, j], side="left")
    return codes


def _grow_tree(codes, grad, hess, n_bins, l2, max_depth, shrinkage):
    """One leaf-wise tree. Returns node arrays plus each leaf's sample indices."""
    n = codes.shape[0]
    feature = [np.int32(-1)]
    split_bin = [np.int32(0)]
    left = [np.int32(-1)]
    right = [np.int32(-1)]
    depth = [0]
    leaf_rows = {0: np.arange(n, dtype=np.int64)}
    totals = {0: (float(grad.sum()), float(hess.sum()))}

    heap: list = []
    counter = 0

    def consider(node_id):
        nonlocal counter
        idx = leaf_rows[node_id]
        if depth[node_id] >= max_depth or len(idx) < 2 * MIN_SAMPLES_LEAF:
            return
        hg, hh, hn = kernels.build_histograms(codes, idx, grad, hess, n_bins)
        g_tot, h_tot = totals[node_id]
        gl = np.cumsum(hg, axis=1)
        hl = np.cumsum(hh, axis=1)
        cl = np.cumsum(hn, axis=1)
        gr = g_tot - gl
        hr = h_tot - hl
        cr = len(idx) - cl
        valid = (cl >= MIN_SAMPLES_LEAF) & (cr >= MIN_SAMPLES_LEAF)
        valid[:, -1] = False  # the full range is not a split
        parent_term = g_tot * g_tot / max(h_tot + l2, 1e-12)
        gain = (
            gl * gl / np.maximum(hl + l2, 1e-12)
            + gr * gr / np.maximum(hr + l2, 1e-12)
            - parent_term
        )
        gain = np.where(valid, gain, -np.inf)
        flat = int(np.argmax(gain))  # first maximum: deterministic tie-break
        best = gain.ravel()[flat]
        if not best > MIN_SPLIT_GAIN:
            return
        j, b = divmod(flat, n_bins)
        heapq.heappush(heap, (-float(best), counter, node_id, int(j), int(b)))
        counter += 1

    consider(0)
    max_leaves = 2 ** max_depth
    n_leaves = 1
    while heap and n_leaves < max_leaves:
        _, _, node_id, j, b = heapq.heappop(heap)
        idx = leaf_rows.pop(node_id)
        mask = codes[idx, j] <= b
        li, ri = idx[mask], idx[~mask]
        lid, rid = len(feature), len(feature) + 1
        feature[node_id] = np.int32(j)
        split_bin[node_id] = np.int32(b)
        left[node_id] = np.int32(lid)
        right[node_id] = np.int32(rid)
        for child, rows in ((lid, li), (rid, ri)):
            feature.append(np.int32(-1))
            split_bin.append(np.int32(0))
            left.append(np.int32(-1))
            right.append(np.int32(-1))
            depth.append(depth[node_id] + 1)
            leaf_rows[child] = rows
            totals[child] = (float(grad[rows].sum()), float(hess[rows].sum()))
        n_leaves += 1
        consider(lid)
        consider(rid)

    value = np.zeros(len(feature), dtype=np.float64)
    for node_id, rows in leaf_rows.items():
        g_tot, h_tot = totals[node_id]
        value[node_id] = -shrinkage * g_tot / max(h_tot + l2, 1e-12)
    tree = Tree(
        feature=np.asarray(feature, dtype=np.int32),
        split_bin=np.asarray(split_bin, dtype=np.int32),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=value,
    )
    return tree, leaf_rows


def fit(config: ClassifierConfig, X, labels, weights=None) -> BoostedTreesModel:
    values, y, w = check_training_inputs(X, labels, weights)
    n = len(y)
    # Mean weight 1 keeps hessian sums on the classic count scale that the
    # leaf regularizer l2 expects.
    wn = w * n
    rate = float(np.clip(w @ y, BASE_RATE_CLAMP, 1.0 - BASE_RATE_CLAMP))
    base = math.log(rate / (1.0 - rate))
    cuts = compute_cuts(values, config.n_bins)
    codes = bin_matrix(values, cuts)
    scores = np.full(n, base)
    trees = []
    for _ in range(config.n_trees):
        p = sigmoid(scores)
        grad = wn * (p - y)
        hess = wn * p * (1.0 - p)
        tree, leaf_rows = _grow_tree(
            codes, grad, hess, config.n_bins, config.l2, config.max_depth,
            config.learning_rate,
        )
        for node_id, rows in leaf_rows.items():
            scores[rows] += tree.value[node_id]
        trees.append(tree)
    return BoostedTreesModel(config=config, cuts=cuts, base_score=base, trees=tuple(trees))


def objective(config, params, X, labels, weights=None):
    """Boosting objective as a function of the per-sample raw scores:
    sum of (mean-1-scaled) weighted log losses. ``params`` is the score vector."""
    values, y, w = check_training_inputs(X, labels, weights)
    scores = np.asarray(params, dtype=np.float64)
    if scores.shape != y.shape:
        raise ValueError("params must be one raw score per sample")
    wn = w * len(y)
    return float(wn @ (np.logaddexp(0.0, scores) - y * scores))


def gradient(config, params, X, labels, weights=None):
    """Per-sample gradient of the boosting objective: the g statistics whose
    per-leaf sums drive every split."""
    values, y, w = check_training_inputs(X, labels, weights)
    scores = np.asarray(params, dtype=np.float64)
    p = sigmoid(scores)
    return (w * len(y)) * (p - y)


def hessian_diag(config, params, X, labels, weights=None):
    """Per-sample second derivatives: the h statistics."""
    values, y, w = check_training_inputs(X, labels, weights)
    scores = np.asarray(params, dtype=np.float64)
    p = sigmoid(scores)
    return (w * len(y)) * p * (1.0 - p)
