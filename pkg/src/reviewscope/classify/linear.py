"""Elastic-net logistic regression baseline on standardized markers.

Features are z-scored with the training means and population SDs
(floored at 1e-12 for degenerate columns); both constants are stored in
the model so inference standardizes identically. The penalized
objective

    sum_i w_i * logloss_i + (1/C) * [l1 * |b|_1 + (1 - l1)/2 * |b|_2^2]

is minimized by accelerated proximal gradient descent (the L1 part via
soft-thresholding; the intercept is unpenalized), stopping at a 1e-6
parameter-change tolerance or 5,000 iterations, whichever comes first.
"""

from __future__ import annotations

import numpy as np

from .model import (
    LINEAR,
    LinearPayload,
    TrainedModel,
    instance_weights,
    sigmoid,
    validate_training_inputs,
)

SD_FLOOR = 1e-12
MAX_ITER = 5000
PARAM_TOL = 1e-6

DEFAULT_LINEAR_PARAMS = {"C": 1.0, "l1_ratio": 0.5}


def _soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def fit_logistic_regression(X, y, hyperparams: dict, w_plus: float, seed: int = 0) -> TrainedModel:
    X, y = validate_training_inputs(X, y)
    params = {**DEFAULT_LINEAR_PARAMS, **(hyperparams or {})}
    C = float(params["C"])
    l1_ratio = float(params["l1_ratio"])
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")
    if not 0.0 <= l1_ratio <= 1.0:
        raise ValueError(f"l1_ratio must be in [0, 1], got {l1_ratio}")

    weights = instance_weights(y, w_plus)
    means = X.mean(axis=0)
    sds = np.maximum(X.std(axis=0), SD_FLOOR)
    Z = (X - means) / sds

    n, m = Z.shape
    design = np.hstack([Z, np.ones((n, 1))])
    l1_strength = l1_ratio / C
    l2_strength = (1.0 - l1_ratio) / C

    # Lipschitz bound: logloss curvature <= 1/4 per unit weight, plus ridge.
    lipschitz = 0.25 * np.linalg.norm(np.sqrt(weights)[:, None] * design, 2) ** 2 + l2_strength
    step = 1.0 / lipschitz

    theta = np.zeros(m + 1)
    momentum = theta.copy()
    t_acc = 1.0
    converged = False
    n_iter = 0
    for n_iter in range(1, MAX_ITER + 1):
        p = sigmoid(design @ momentum)
        grad = design.T @ (weights * (p - y))
        grad[:m] += l2_strength * momentum[:m]
        candidate = momentum - step * grad
        candidate[:m] = _soft_threshold(candidate[:m], step * l1_strength)

        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t_acc**2)) / 2.0
        momentum = candidate + ((t_acc - 1.0) / t_next) * (candidate - theta)
        t_acc = t_next

        delta = np.abs(candidate - theta).max()
        theta = candidate
        if delta < PARAM_TOL:
            converged = True
            break

    payload = LinearPayload(
        means=tuple(float(v) for v in means),
        sds=tuple(float(v) for v in sds),
        coefficients=tuple(float(v) for v in theta[:m]),
        intercept=float(theta[m]),
        converged=converged,
        n_iter=n_iter,
    )
    return TrainedModel(
        kind=LINEAR,
        class_weight=float(w_plus),
        seed=seed,
        hyperparameters=params,
        linear=payload,
    )
