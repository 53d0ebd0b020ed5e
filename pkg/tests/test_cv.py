import numpy as np
import pytest

from reviewscope.classify import DEFAULT_GRIDS, grid_search, stratified_kfold
from reviewscope.classify.cv import enumerate_grid
from reviewscope.classify.model import GRADIENT_BOOSTED, ModelError


class TestStratifiedKfold:
    def test_ten_samples_five_folds(self):
        y = np.array([0] * 5 + [1] * 5)
        folds = stratified_kfold(None, y, k=5, seed=0)
        assert len(folds) == 5
        for fold in folds:
            assert np.sum(y[fold] == 0) == 1
            assert np.sum(y[fold] == 1) == 1

    def test_disjoint_and_exhaustive(self):
        y = np.array([0] * 23 + [1] * 11)
        folds = stratified_kfold(None, y, k=5, seed=3)
        combined = np.concatenate(folds)
        assert sorted(combined) == list(range(34))

    def test_per_class_fold_sizes_within_one(self):
        y = np.array([0] * 23 + [1] * 11)
        folds = stratified_kfold(None, y, k=5, seed=3)
        for label in (0, 1):
            sizes = [int(np.sum(y[fold] == label)) for fold in folds]
            assert max(sizes) - min(sizes) <= 1

    def test_deterministic(self):
        y = np.array([0, 1] * 10)
        a = stratified_kfold(None, y, k=4, seed=9)
        b = stratified_kfold(None, y, k=4, seed=9)
        assert all(np.array_equal(fa, fb) for fa, fb in zip(a, b))


class TestGridEnumeration:
    def test_boosted_grid_has_24_cells(self):
        assert len(enumerate_grid(DEFAULT_GRIDS[GRADIENT_BOOSTED])) == 24

    def test_single_cell(self):
        assert enumerate_grid({"max_depth": [3]}) == [{"max_depth": 3}]

    def test_empty_grid_errors(self):
        with pytest.raises(ModelError):
            enumerate_grid({})
        with pytest.raises(ModelError):
            enumerate_grid({"max_depth": []})

    def test_enumeration_order_is_insertion_order(self):
        cells = enumerate_grid({"a": [1, 2], "b": [10, 20]})
        assert cells == [
            {"a": 1, "b": 10},
            {"a": 1, "b": 20},
            {"a": 2, "b": 10},
            {"a": 2, "b": 20},
        ]


def noisy_stump_data(seed=0, n=120, flip=6):
    """x7 separates; a handful of flipped labels punish deep trees."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, 8))
    y = (X[:, 6] > 0.5).astype(int)
    flips = rng.choice(n, size=flip, replace=False)
    y[flips] = 1 - y[flips]
    return X, y


class TestGridSearch:
    def test_single_cell_selected(self):
        X, y = noisy_stump_data()
        result = grid_search(
            GRADIENT_BOOSTED, {"n_estimators": [5], "max_depth": [2]}, X, y, k=3, seed=0
        )
        assert result.best_params == {"n_estimators": 5, "max_depth": 2}
        assert len(result.cells) == 1

    def test_dominant_shallow_cell_wins(self):
        X, y = noisy_stump_data(seed=4)
        grid = {"n_estimators": [30], "max_depth": [1, 6], "learning_rate": [0.4]}
        result = grid_search(GRADIENT_BOOSTED, grid, X, y, k=5, seed=1)
        assert result.best_params["max_depth"] == 1
        by_depth = {p["max_depth"]: s for p, s in result.cells}
        assert by_depth[1] > by_depth[6]

    def test_mean_auc_reported_per_cell(self):
        X, y = noisy_stump_data()
        grid = {"n_estimators": [5, 10], "max_depth": [2]}
        result = grid_search(GRADIENT_BOOSTED, grid, X, y, k=3, seed=0)
        assert len(result.cells) == 2
        for _, score in result.cells:
            assert 0.0 <= score <= 1.0

    def test_tie_breaks_to_first_enumerated(self):
        X, y = noisy_stump_data()
        # identical cells -> identical scores -> first one must win
        grid = {"n_estimators": [5, 5], "max_depth": [2]}
        result = grid_search(GRADIENT_BOOSTED, grid, X, y, k=3, seed=0)
        assert result.cells[0][1] == result.cells[1][1]
        assert result.best_params is result.cells[0][0]
