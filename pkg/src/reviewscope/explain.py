"""Exact Shapley attributions for the fitted classifiers.

For tree ensembles this is the polynomial-time path algorithm with
cover-fraction conditioning: a feature absent from the conditioning set
is integrated out by weighting each branch with its share of training
weight. ``shapley_bruteforce`` evaluates the defining subset sum
directly (all 2^8 feature subsets, identical conditioning), so the two
must agree to floating-point precision; the fast path is tested against
the slow one, not the other way around.

Attributions live on the model's raw-output scale: log-odds for the
boosted and linear models, probability for the forest. The base value
is the cover-weighted expected output, and base + sum(values) equals
the model output for the explained instance (local accuracy).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify.model import LINEAR, TREE_KINDS, TrainedModel, _as_row
from .classify.trees import TreeNode
from .markers import MARKER_NAMES, N_MARKERS


class ExplainError(ValueError):
    """Raised when an explainer is applied to the wrong model kind."""


@dataclass(frozen=True)
class ShapExplanation:
    """Signed per-marker attributions for one prediction."""

    base_value: float
    values: tuple[float, ...]
    scale: str  # "margin" (log-odds) or "probability"
    model_version: str
    top_contributors: tuple[tuple[str, float, str], ...]

    def to_dict(self) -> dict:
        return {
            "base_value": self.base_value,
            "scale": self.scale,
            "model_version": self.model_version,
            "values": {name: v for name, v in zip(MARKER_NAMES, self.values)},
            "top5": [
                {"name": name, "value": value, "direction": direction}
                for name, value, direction in self.top_contributors
            ],
        }


@dataclass(frozen=True)
class GlobalImportance:
    """Dataset-level importance: mean |shap| and normalized split gain."""

    mean_abs_shap: tuple[float, ...]
    gain_importance: tuple[float, ...] | None  # tree kinds, when any split exists

    def ranking(self) -> list[tuple[str, float]]:
        pairs = list(zip(MARKER_NAMES, self.mean_abs_shap))
        pairs.sort(key=lambda item: -item[1])
        return pairs


def top_contributors(values, k: int = 5) -> tuple[tuple[str, float, str], ...]:
    """Top-k markers by |value|, descending; ties break by marker index."""
    values = list(values)
    order = sorted(range(len(values)), key=lambda j: (-abs(values[j]), j))
    picked = order[: min(k, len(values))]
    return tuple(
        (MARKER_NAMES[j], values[j], "toward AI" if values[j] > 0 else "toward Human")
        for j in picked
    )


# -- path-dependent tree traversal -------------------------------------------

def _extend(path: list, zero_fraction: float, one_fraction: float, feature: int) -> None:
    depth = len(path)
    path.append([feature, zero_fraction, one_fraction, 1.0 if depth == 0 else 0.0])
    for i in range(depth - 1, -1, -1):
        path[i + 1][3] += one_fraction * path[i][3] * (i + 1) / (depth + 1)
        path[i][3] = zero_fraction * path[i][3] * (depth - i) / (depth + 1)


def _unwind(path: list, index: int) -> None:
    depth = len(path) - 1
    one_fraction = path[index][2]
    zero_fraction = path[index][1]
    next_one = path[depth][3]
    for j in range(depth - 1, -1, -1):
        if one_fraction != 0.0:
            tmp = path[j][3]
            path[j][3] = next_one * (depth + 1) / ((j + 1) * one_fraction)
            next_one = tmp - path[j][3] * zero_fraction * (depth - j) / (depth + 1)
        else:
            path[j][3] = path[j][3] * (depth + 1) / (zero_fraction * (depth - j))
    for j in range(index, depth):
        path[j][0] = path[j + 1][0]
        path[j][1] = path[j + 1][1]
        path[j][2] = path[j + 1][2]
    path.pop()


def _unwound_sum(path: list, index: int) -> float:
    depth = len(path) - 1
    one_fraction = path[index][2]
    zero_fraction = path[index][1]
    next_one = path[depth][3]
    total = 0.0
    for j in range(depth - 1, -1, -1):
        if one_fraction != 0.0:
            tmp = next_one * (depth + 1) / ((j + 1) * one_fraction)
            total += tmp
            next_one = path[j][3] - tmp * zero_fraction * (depth - j) / (depth + 1)
        else:
            total += path[j][3] / zero_fraction * (depth + 1) / (depth - j)
    return total


def _shap_recurse(
    node: TreeNode,
    x: np.ndarray,
    phi: np.ndarray,
    parent_path: list,
    zero_fraction: float,
    one_fraction: float,
    feature: int,
) -> None:
    path = [element.copy() for element in parent_path]
    _extend(path, zero_fraction, one_fraction, feature)

    if node.is_leaf:
        for i in range(1, len(path)):
            weight = _unwound_sum(path, i)
            phi[path[i][0]] += weight * (path[i][2] - path[i][1]) * node.value
        return

    hot, cold = (
        (node.left, node.right)
        if x[node.feature] < node.threshold
        else (node.right, node.left)
    )
    incoming_zero = incoming_one = 1.0
    for k in range(1, len(path)):
        if path[k][0] == node.feature:
            incoming_zero, incoming_one = path[k][1], path[k][2]
            _unwind(path, k)
            break

    _shap_recurse(
        hot, x, phi, path,
        incoming_zero * hot.cover / node.cover, incoming_one, node.feature,
    )
    _shap_recurse(
        cold, x, phi, path,
        incoming_zero * cold.cover / node.cover, 0.0, node.feature,
    )


def _single_tree_shap(tree: TreeNode, x: np.ndarray) -> np.ndarray:
    phi = np.zeros(N_MARKERS)
    _shap_recurse(tree, x, phi, [], 1.0, 1.0, -1)
    return phi


def _tree_scale(model: TrainedModel) -> float:
    # forest output is the mean over trees; boosted trees are additive
    return 1.0 / len(model.trees) if model.kind == "random_forest" else 1.0


def _require_tree_kind(model: TrainedModel) -> None:
    if model.kind not in TREE_KINDS:
        raise ExplainError(
            f"tree explainer needs a tree ensemble, got {model.kind!r}; "
            "use linear_shap for the linear baseline"
        )


def tree_shap(model: TrainedModel, x) -> ShapExplanation:
    """Exact Shapley attributions for a tree-ensemble prediction."""
    _require_tree_kind(model)
    row = _as_row(x)[0]
    scale = _tree_scale(model)
    phi = np.zeros(N_MARKERS)
    base = model.base_score if model.kind == "gradient_boosted" else 0.0
    for tree in model.trees:
        phi += _single_tree_shap(tree, row) * scale
        base += tree.expected_value() * scale
    values = tuple(float(v) for v in phi)
    return ShapExplanation(
        base_value=float(base),
        values=values,
        scale=model.output_scale,
        model_version=model.version,
        top_contributors=top_contributors(values),
    )


# -- brute-force oracle -------------------------------------------------------

def _leaf_paths(tree: TreeNode) -> list[tuple[list, float]]:
    """(edges, leaf value) per leaf; an edge records the split feature,
    threshold, the branch's cover fraction, and whether it is the left one."""
    paths = []

    def walk(node: TreeNode, edges: list) -> None:
        if node.is_leaf:
            paths.append((edges, node.value))
            return
        walk(node.left, edges + [(node.feature, node.threshold, node.left.cover / node.cover, True)])
        walk(node.right, edges + [(node.feature, node.threshold, node.right.cover / node.cover, False)])

    walk(tree, [])
    return paths


def _subset_expectations(tree: TreeNode, x: np.ndarray, member_masks: np.ndarray) -> np.ndarray:
    """E[f | features in S] for every subset S, by summing leaf reach
    probabilities: along each root-to-leaf edge, a feature in S
    contributes an indicator of x's branch, otherwise its cover fraction.
    """
    n_subsets = member_masks.shape[0]
    values = np.zeros(n_subsets)
    for edges, leaf_value in _leaf_paths(tree):
        reach = np.ones(n_subsets)
        for feature, threshold, cover_fraction, is_left in edges:
            follows = (x[feature] < threshold) == is_left
            reach *= np.where(member_masks[:, feature], 1.0 if follows else 0.0, cover_fraction)
        values += reach * leaf_value
    return values


def _all_subset_values(model: TrainedModel, x: np.ndarray) -> np.ndarray:
    masks = np.array(
        [[(s >> j) & 1 == 1 for j in range(N_MARKERS)] for s in range(2**N_MARKERS)]
    )
    scale = _tree_scale(model)
    values = np.full(2**N_MARKERS, model.base_score if model.kind == "gradient_boosted" else 0.0)
    for tree in model.trees:
        values += _subset_expectations(tree, x, masks) * scale
    return values


def shapley_bruteforce(model: TrainedModel, x) -> np.ndarray:
    """Direct subset-sum evaluation of the Shapley values (the oracle).

    Exponential in the number of markers; with 8 markers that is 256
    conditioned expectations per tree, which stays fast.
    """
    _require_tree_kind(model)
    row = _as_row(x)[0]
    f = _all_subset_values(model, row)
    m = N_MARKERS
    size_weight = [
        math.factorial(s) * math.factorial(m - s - 1) / math.factorial(m) for s in range(m)
    ]
    phi = np.zeros(m)
    for j in range(m):
        bit = 1 << j
        for subset in range(2**m):
            if subset & bit:
                continue
            size = bin(subset).count("1")
            phi[j] += size_weight[size] * (f[subset | bit] - f[subset])
    return phi


def linear_shap(model: TrainedModel, x) -> ShapExplanation:
    """Attributions for the standardized linear model.

    On standardized inputs the training mean is zero by construction,
    so each marker contributes coefficient * z and the base value is
    the intercept.
    """
    if model.kind != LINEAR:
        raise ExplainError(f"linear_shap needs the linear baseline, got {model.kind!r}")
    row = _as_row(x)
    z = model.linear.standardize(row)[0]
    values = tuple(float(b * zj) for b, zj in zip(model.linear.coefficients, z))
    return ShapExplanation(
        base_value=model.linear.intercept,
        values=values,
        scale="margin",
        model_version=model.version,
        top_contributors=top_contributors(values),
    )


def explain(model: TrainedModel, x) -> ShapExplanation:
    """Dispatch to the matching explainer for the model kind."""
    return linear_shap(model, x) if model.kind == LINEAR else tree_shap(model, x)


def global_importance(model: TrainedModel, X) -> GlobalImportance:
    """Mean |shap| per marker over a dataset, plus normalized split gain."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ExplainError("X must be a non-empty (n, 8) matrix")
    totals = np.zeros(N_MARKERS)
    for row in X:
        explanation = explain(model, row)
        totals += np.abs(np.asarray(explanation.values))
    mean_abs = totals / X.shape[0]

    gain_importance = None
    if model.kind in TREE_KINDS:
        gains = np.zeros(N_MARKERS)

        def collect(node: TreeNode) -> None:
            if node.is_leaf:
                return
            gains[node.feature] += node.gain
            collect(node.left)
            collect(node.right)

        for tree in model.trees:
            collect(tree)
        total = gains.sum()
        if total > 0:
            gain_importance = tuple(float(g) for g in gains / total)

    return GlobalImportance(
        mean_abs_shap=tuple(float(v) for v in mean_abs),
        gain_importance=gain_importance,
    )
