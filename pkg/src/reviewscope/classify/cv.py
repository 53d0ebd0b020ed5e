"""Stratified k-fold cross-validation and exhaustive grid search on AUC.

Grid cells are enumerated as the Cartesian product of the grid mapping
in insertion order; each cell's score is the mean validation AUC across
folds; ties keep the first cell enumerated. The positive-class weight
is recomputed on each fold's training portion, and the linear model
standardizes inside the fold, so no statistics leak from validation
rows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .boosting import fit_gradient_boosting
from .forest import fit_random_forest
from .linear import fit_logistic_regression
from .metrics import auc_roc
from .model import GRADIENT_BOOSTED, LINEAR, RANDOM_FOREST, ModelError, compute_class_weight

FIT_FUNCTIONS = {
    GRADIENT_BOOSTED: fit_gradient_boosting,
    RANDOM_FOREST: fit_random_forest,
    LINEAR: fit_logistic_regression,
}

DEFAULT_GRIDS = {
    GRADIENT_BOOSTED: {
        "n_estimators": [100, 200],
        "max_depth": [3, 5, 7],
        "learning_rate": [0.05, 0.1],
        "subsample": [0.8, 1.0],
    },
    RANDOM_FOREST: {
        "n_estimators": [100, 200, 300],
        "max_depth": [3, 5, 7, None],
        "min_samples_split": [2, 5],
        "min_samples_leaf": [1, 2],
    },
    LINEAR: {
        "C": [0.01, 0.1, 1.0, 10.0, 100.0],
        "l1_ratio": [0.0, 0.5, 1.0],
    },
}


def stratified_kfold(X, y, k: int = 5, seed: int = 0) -> list[np.ndarray]:
    """Partition row indices into k stratified folds.

    Per-class fold sizes differ by at most one; folds are disjoint and
    exhaustive; deterministic for a fixed seed. Returns the test-index
    array of each fold.
    """
    y = np.asarray(y, dtype=int)
    n = y.shape[0]
    if k < 2:
        raise ModelError(f"k must be >= 2, got {k}")
    if n < k:
        raise ModelError(f"cannot make {k} folds from {n} rows")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for label in (0, 1):
        members = np.flatnonzero(y == label)
        members = members[rng.permutation(members.size)]
        for position, row in enumerate(members):
            folds[position % k].append(int(row))
    return [np.array(sorted(fold), dtype=int) for fold in folds]


def enumerate_grid(grid: dict) -> list[dict]:
    """Cartesian product of the grid mapping, in insertion order."""
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ModelError("empty hyperparameter grid")
    keys = list(grid.keys())
    return [dict(zip(keys, combo)) for combo in itertools.product(*grid.values())]


@dataclass(frozen=True)
class GridSearchResult:
    family: str
    best_params: dict
    best_score: float
    cells: tuple[tuple[dict, float], ...]  # (params, mean CV AUC) per cell

    def format_table(self) -> str:
        keys = list(self.cells[0][0].keys())
        header = "  ".join(f"{k:>16}" for k in keys) + "  " + f"{'mean_auc':>10}"
        lines = [header]
        for params, score in self.cells:
            row = "  ".join(f"{str(params[k]):>16}" for k in keys)
            lines.append(row + "  " + f"{score:>10.4f}")
        return "\n".join(lines)


def grid_search(
    family: str,
    grid: dict,
    X,
    y,
    k: int = 5,
    seed: int = 0,
) -> GridSearchResult:
    """Exhaustive search scored by mean validation AUC over k folds."""
    if family not in FIT_FUNCTIONS:
        raise ModelError(f"unknown model family {family!r}")
    fit = FIT_FUNCTIONS[family]
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    cells = enumerate_grid(grid)
    folds = stratified_kfold(X, y, k=k, seed=seed)
    all_rows = np.arange(y.shape[0])

    scored: list[tuple[dict, float]] = []
    best_params: dict | None = None
    best_score = -np.inf
    for params in cells:
        fold_scores = []
        for test_idx in folds:
            train_mask = np.ones(y.shape[0], dtype=bool)
            train_mask[test_idx] = False
            train_idx = all_rows[train_mask]
            w_plus = compute_class_weight(y[train_idx])
            model = fit(X[train_idx], y[train_idx], params, w_plus, seed=seed)
            scores = model.proba_ai(X[test_idx])
            fold_scores.append(auc_roc(y[test_idx], scores))
        mean_auc = float(np.mean(fold_scores))
        scored.append((params, mean_auc))
        if mean_auc > best_score:
            best_score = mean_auc
            best_params = params

    return GridSearchResult(
        family=family,
        best_params=best_params,
        best_score=best_score,
        cells=tuple(scored),
    )
