"""Gradient-boosted trees for weighted binary log-loss.

Stagewise additive fitting: each stage builds a second-order regression
tree on the current gradients and hessians, shrunk by the learning
rate, optionally on a row subsample. AI-class instances carry the
cost-sensitive weight, so the weighted positive and negative masses
balance and the initial margin is zero at the canonical weighting.
Fitting stops early once the gradients vanish (separable data), which
only drops trees that would be all-zero leaves.
"""

from __future__ import annotations

import math

import numpy as np

from .model import (
    GRADIENT_BOOSTED,
    ModelError,
    TrainedModel,
    instance_weights,
    sigmoid,
    validate_training_inputs,
)
from .trees import build_regression_tree

REG_LAMBDA = 1.0
_GRADIENT_TOL = 1e-10

DEFAULT_BOOSTING_PARAMS = {
    "n_estimators": 100,
    "max_depth": 3,
    "learning_rate": 0.1,
    "subsample": 1.0,
}


def fit_gradient_boosting(X, y, hyperparams: dict, w_plus: float, seed: int = 0) -> TrainedModel:
    """Fit the boosted ensemble; deterministic for a fixed seed."""
    X, y = validate_training_inputs(X, y)
    params = {**DEFAULT_BOOSTING_PARAMS, **(hyperparams or {})}
    n_estimators = int(params["n_estimators"])
    max_depth = int(params["max_depth"])
    learning_rate = float(params["learning_rate"])
    subsample = float(params["subsample"])
    if not 0.0 < subsample <= 1.0:
        raise ModelError(f"subsample must be in (0, 1], got {subsample}")

    weights = instance_weights(y, w_plus)
    rng = np.random.default_rng(seed)

    base_rate = float(np.sum(weights * y) / np.sum(weights))
    base_score = math.log(base_rate / (1.0 - base_rate))

    n = X.shape[0]
    margins = np.full(n, base_score)
    trees = []
    for _ in range(n_estimators):
        p = sigmoid(margins)
        grad = weights * (p - y)
        hess = weights * p * (1.0 - p)
        if np.abs(grad).max() < _GRADIENT_TOL:
            break
        if subsample < 1.0:
            k = max(1, round(n * subsample))
            rows = np.sort(rng.permutation(n)[:k])
        else:
            rows = np.arange(n)
        tree = build_regression_tree(
            X[rows], grad[rows], hess[rows], weights[rows], max_depth, REG_LAMBDA
        )
        tree = _scale_leaves(tree, learning_rate)
        margins += tree.predict(X)
        trees.append(tree)

    return TrainedModel(
        kind=GRADIENT_BOOSTED,
        class_weight=float(w_plus),
        seed=seed,
        hyperparameters=params,
        trees=tuple(trees),
        base_score=base_score,
        metadata={"n_trees_fitted": len(trees)},
    )


def _scale_leaves(tree, factor: float):
    """Bake the learning rate into leaf values so trees stay additive."""
    from .trees import TreeNode

    if tree.is_leaf:
        return TreeNode(cover=tree.cover, value=tree.value * factor)
    return TreeNode(
        cover=tree.cover,
        feature=tree.feature,
        threshold=tree.threshold,
        gain=tree.gain,
        left=_scale_leaves(tree.left, factor),
        right=_scale_leaves(tree.right, factor),
    )
