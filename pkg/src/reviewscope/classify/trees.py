"""Binary decision trees shared by the boosted and bagged ensembles.

Nodes carry the training weight reaching them (``cover``) and the split
loss reduction (``gain``); both feed the Shapley explainer. Split
predicates are ``x[feature] < threshold`` goes left, with thresholds
placed on the next distinct feature value so the partition is exact in
floating point. Parent cover is defined as ``left.cover + right.cover``
so the conservation invariant holds bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MIN_GAIN = 1e-12


@dataclass(frozen=True)
class TreeNode:
    """A split node or (when ``feature`` is None) a leaf."""

    cover: float
    feature: int | None = None
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    gain: float = 0.0
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def predict_one(self, x) -> float:
        node = self
        while not node.is_leaf:
            node = node.left if x[node.feature] < node.threshold else node.right
        return node.value

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0])
        self._predict_into(X, np.arange(X.shape[0]), out)
        return out

    def _predict_into(self, X, idx, out) -> None:
        if self.is_leaf:
            out[idx] = self.value
            return
        goes_left = X[idx, self.feature] < self.threshold
        self.left._predict_into(X, idx[goes_left], out)
        self.right._predict_into(X, idx[~goes_left], out)

    def expected_value(self) -> float:
        """Cover-weighted mean leaf value (the tree's background output)."""
        if self.is_leaf:
            return self.value
        return (
            self.left.cover * self.left.expected_value()
            + self.right.cover * self.right.expected_value()
        ) / self.cover

    def max_depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.max_depth(), self.right.max_depth())

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": self.value, "cover": self.cover}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "cover": self.cover,
            "gain": self.gain,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, record: dict) -> "TreeNode":
        if "leaf" in record:
            return cls(cover=float(record["cover"]), value=float(record["leaf"]))
        return cls(
            cover=float(record["cover"]),
            feature=int(record["feature"]),
            threshold=float(record["threshold"]),
            gain=float(record["gain"]),
            left=cls.from_dict(record["left"]),
            right=cls.from_dict(record["right"]),
        )


def _split_candidates(column: np.ndarray):
    """Sorted order plus boundary mask between distinct adjacent values."""
    order = np.argsort(column, kind="stable")
    sorted_vals = column[order]
    distinct = sorted_vals[:-1] < sorted_vals[1:]
    return order, sorted_vals, distinct


def build_regression_tree(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    weight: np.ndarray,
    max_depth: int,
    reg_lambda: float = 1.0,
) -> TreeNode:
    """Second-order regression tree on (gradient, hessian) statistics.

    Leaf values are the Newton estimates -G/(H + reg_lambda); split
    quality is the standard second-order gain. Used by the boosted
    ensemble.
    """

    def leaf(idx) -> TreeNode:
        g, h = grad[idx].sum(), hess[idx].sum()
        return TreeNode(cover=float(weight[idx].sum()), value=float(-g / (h + reg_lambda)))

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        if depth >= max_depth or idx.size < 2:
            return leaf(idx)
        g_total, h_total = grad[idx].sum(), hess[idx].sum()
        parent_score = g_total * g_total / (h_total + reg_lambda)

        best_gain = _MIN_GAIN
        best = None
        for j in range(X.shape[1]):
            order, sorted_vals, distinct = _split_candidates(X[idx, j])
            if not distinct.any():
                continue
            g_left = np.cumsum(grad[idx][order])[:-1]
            h_left = np.cumsum(hess[idx][order])[:-1]
            g_right = g_total - g_left
            h_right = h_total - h_left
            gains = 0.5 * (
                g_left**2 / (h_left + reg_lambda)
                + g_right**2 / (h_right + reg_lambda)
                - parent_score
            )
            gains[~distinct] = -np.inf
            k = int(np.argmax(gains))
            if gains[k] > best_gain:
                best_gain = float(gains[k])
                best = (j, float(sorted_vals[k + 1]))
        if best is None:
            return leaf(idx)

        j, threshold = best
        goes_left = X[idx, j] < threshold
        left = grow(idx[goes_left], depth + 1)
        right = grow(idx[~goes_left], depth + 1)
        return TreeNode(
            cover=left.cover + right.cover,
            feature=j,
            threshold=threshold,
            left=left,
            right=right,
            gain=best_gain,
        )

    return grow(np.arange(X.shape[0]), 0)


def build_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    weight: np.ndarray,
    *,
    max_depth: int | None,
    min_samples_split: int,
    min_samples_leaf: int,
    max_features: int,
    rng: np.random.Generator,
) -> TreeNode:
    """Weighted-Gini classification tree with per-split feature subsampling.

    Leaf values are the weighted positive-class fraction. Used by the
    random forest.
    """
    n_features = X.shape[1]

    def leaf(idx) -> TreeNode:
        w = weight[idx]
        total = w.sum()
        positive = w[y[idx] == 1].sum()
        return TreeNode(cover=float(total), value=float(positive / total))

    def gini_times_weight(w_pos, w_total):
        # weighted impurity mass: W * (1 - p0^2 - p1^2), vector-safe
        with np.errstate(invalid="ignore", divide="ignore"):
            p1 = np.where(w_total > 0, w_pos / w_total, 0.0)
        return w_total * 2.0 * p1 * (1.0 - p1)

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        if (
            (max_depth is not None and depth >= max_depth)
            or idx.size < min_samples_split
            or idx.size < 2 * min_samples_leaf
        ):
            return leaf(idx)
        labels = y[idx]
        if labels.min() == labels.max():
            return leaf(idx)

        w = weight[idx]
        w_pos_total = w[labels == 1].sum()
        w_total = w.sum()
        parent_impurity = gini_times_weight(w_pos_total, w_total)

        features = rng.choice(n_features, size=min(max_features, n_features), replace=False)
        features.sort()
        best_gain = _MIN_GAIN
        best = None
        for j in features:
            order, sorted_vals, distinct = _split_candidates(X[idx, j])
            if not distinct.any():
                continue
            w_sorted = w[order]
            pos_sorted = w_sorted * (labels[order] == 1)
            w_left = np.cumsum(w_sorted)[:-1]
            pos_left = np.cumsum(pos_sorted)[:-1]
            w_right = w_total - w_left
            pos_right = w_pos_total - pos_left
            gains = (
                parent_impurity
                - gini_times_weight(pos_left, w_left)
                - gini_times_weight(pos_right, w_right)
            )
            counts_left = np.arange(1, idx.size)
            ok = distinct & (counts_left >= min_samples_leaf) & (idx.size - counts_left >= min_samples_leaf)
            gains[~ok] = -np.inf
            k = int(np.argmax(gains))
            if gains[k] > best_gain:
                best_gain = float(gains[k])
                best = (int(j), float(sorted_vals[k + 1]))
        if best is None:
            return leaf(idx)

        j, threshold = best
        goes_left = X[idx, j] < threshold
        left = grow(idx[goes_left], depth + 1)
        right = grow(idx[~goes_left], depth + 1)
        return TreeNode(
            cover=left.cover + right.cover,
            feature=j,
            threshold=threshold,
            left=left,
            right=right,
            gain=best_gain,
        )

    return grow(np.arange(X.shape[0]), 0)
