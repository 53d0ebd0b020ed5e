"""Random forest over marker vectors.

Bootstrap-sampled, feature-subsampled Gini trees with class weights;
the ensemble probability is the mean of per-tree leaf class
frequencies, so the model's raw output lives on the probability scale.
"""

from __future__ import annotations

import numpy as np

from .model import (
    RANDOM_FOREST,
    TrainedModel,
    instance_weights,
    validate_training_inputs,
)
from .trees import build_classification_tree

DEFAULT_FOREST_PARAMS = {
    "n_estimators": 100,
    "max_depth": None,
    "min_samples_split": 2,
    "min_samples_leaf": 1,
    "max_features": 2,  # floor(sqrt(8)) of the marker space
    "bootstrap": True,
}


def fit_random_forest(X, y, hyperparams: dict, w_plus: float, seed: int = 0) -> TrainedModel:
    """Fit the forest; deterministic for a fixed seed."""
    X, y = validate_training_inputs(X, y)
    params = {**DEFAULT_FOREST_PARAMS, **(hyperparams or {})}
    n_estimators = int(params["n_estimators"])
    max_depth = params["max_depth"]
    max_depth = None if max_depth is None else int(max_depth)

    weights = instance_weights(y, w_plus)
    rng = np.random.default_rng(seed)
    n = X.shape[0]

    trees = []
    for _ in range(n_estimators):
        if params["bootstrap"]:
            rows = rng.integers(0, n, size=n)
        else:
            rows = np.arange(n)
        trees.append(
            build_classification_tree(
                X[rows],
                y[rows],
                weights[rows],
                max_depth=max_depth,
                min_samples_split=int(params["min_samples_split"]),
                min_samples_leaf=int(params["min_samples_leaf"]),
                max_features=int(params["max_features"]),
                rng=rng,
            )
        )

    return TrainedModel(
        kind=RANDOM_FOREST,
        class_weight=float(w_plus),
        seed=seed,
        hyperparameters=params,
        trees=tuple(trees),
    )
