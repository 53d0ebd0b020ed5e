from fractions import Fraction

import numpy as np
import pytest

from reviewscope.classify import (
    compute_class_weight,
    fit_gradient_boosting,
    fit_logistic_regression,
    fit_random_forest,
    load_model,
    predict,
    predict_proba,
    save_model,
)
from reviewscope.classify.model import ModelError, instance_weights
from reviewscope.classify.trees import TreeNode
from reviewscope.markers import MarkerVector


def separable_fixture(n=200, seed=0):
    """x7 > 0.5 if and only if the review is AI; other markers are noise."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, size=(n, 8))
    y = np.zeros(n, dtype=int)
    half = n // 2
    y[half:] = 1
    X[:half, 6] = rng.uniform(0.0, 0.45, size=half)
    X[half:, 6] = rng.uniform(0.55, 1.0, size=n - half)
    return X, y


class TestClassWeight:
    def test_ratio(self):
        y = [0] * 12 + [1] * 4
        assert compute_class_weight(y) == 3.0

    def test_corpus_ratio(self):
        y = [0] * 5772 + [1] * 2000
        assert compute_class_weight(y) == pytest.approx(2.886, abs=1e-9)

    def test_balanced(self):
        assert compute_class_weight([0, 1, 0, 1]) == 1.0

    def test_no_positives_errors(self):
        with pytest.raises(ModelError):
            compute_class_weight([0, 0, 0])

    def test_weighted_masses_balance_exactly(self):
        rng = np.random.default_rng(99)
        for _ in range(25):
            n0 = int(rng.integers(1, 400))
            n1 = int(rng.integers(1, 400))
            w_exact = Fraction(n0, n1)
            assert w_exact * n1 == n0


class TestGradientBoosting:
    def test_separable_training_accuracy(self):
        X, y = separable_fixture()
        model = fit_gradient_boosting(
            X, y, {"n_estimators": 10, "max_depth": 1, "learning_rate": 0.5}, w_plus=1.0
        )
        predictions = (model.proba_ai(X) >= 0.5).astype(int)
        assert (predictions == y).all()

    def test_single_class_rejected(self):
        X = np.random.default_rng(0).uniform(size=(10, 8))
        with pytest.raises(ModelError, match="single class"):
            fit_gradient_boosting(X, np.ones(10, dtype=int), {}, w_plus=1.0)

    def test_deterministic_per_seed(self):
        X, y = separable_fixture(80)
        params = {"n_estimators": 20, "max_depth": 3, "subsample": 0.8}
        a = fit_gradient_boosting(X, y, params, w_plus=1.0, seed=7)
        b = fit_gradient_boosting(X, y, params, w_plus=1.0, seed=7)
        assert np.array_equal(a.proba_ai(X), b.proba_ai(X))

    def test_margin_additivity_tree_removal(self):
        from dataclasses import replace

        X, y = separable_fixture(60)
        model = fit_gradient_boosting(X, y, {"n_estimators": 8, "max_depth": 2}, w_plus=1.0)
        shorter = replace(model, trees=model.trees[:-1])
        x = X[3]
        rebuilt = shorter.margin(x) + model.trees[-1].predict_one(x)
        assert rebuilt == model.margin(x)

    def test_cover_conservation_and_gain_sign(self):
        X, y = separable_fixture(100)
        model = fit_gradient_boosting(X, y, {"n_estimators": 5, "max_depth": 4}, w_plus=2.5)

        def check(node):
            if node.is_leaf:
                return
            assert node.cover == node.left.cover + node.right.cover
            assert node.gain >= 0
            check(node.left)
            check(node.right)

        for tree in model.trees:
            check(tree)

    def test_eq5_weighting_balances_margin_start(self):
        # weighted base rate is exactly 1/2, so boosting starts at margin 0
        X, y = separable_fixture(90)
        y = np.array([0] * 60 + [1] * 30)
        model = fit_gradient_boosting(X, y, {"n_estimators": 1}, w_plus=compute_class_weight(y))
        assert model.base_score == pytest.approx(0.0, abs=1e-12)

    def test_empty_ensemble_margin_is_base(self):
        X, y = separable_fixture(40)
        model = fit_gradient_boosting(X, y, {"n_estimators": 0}, w_plus=1.0)
        p0, p1 = predict_proba(model, X[0])
        assert p1 == pytest.approx(1.0 / (1.0 + np.exp(-model.base_score)))
        assert p0 + p1 == pytest.approx(1.0)


class TestRandomForest:
    def test_separable_training_accuracy(self):
        X, y = separable_fixture()
        model = fit_random_forest(X, y, {"n_estimators": 30, "max_depth": 4}, w_plus=1.0)
        predictions = (model.proba_ai(X) >= 0.5).astype(int)
        assert (predictions == y).all()

    def test_deterministic_per_seed(self):
        X, y = separable_fixture(80)
        a = fit_random_forest(X, y, {"n_estimators": 15}, w_plus=2.0, seed=3)
        b = fit_random_forest(X, y, {"n_estimators": 15}, w_plus=2.0, seed=3)
        assert np.array_equal(a.proba_ai(X), b.proba_ai(X))

    def test_single_tree_no_bootstrap_degenerate(self):
        X, y = separable_fixture(50)
        model = fit_random_forest(
            X, y, {"n_estimators": 1, "bootstrap": False, "max_features": 8}, w_plus=1.0, seed=5
        )
        assert len(model.trees) == 1
        ensemble = model.proba_ai(X)
        single = model.trees[0].predict(X)
        assert np.array_equal(ensemble, single)

    def test_forest_of_identical_leaves(self):
        leaf = TreeNode(cover=10.0, value=0.3)
        model = fit_random_forest(*separable_fixture(30), {"n_estimators": 2}, 1.0)
        stub = model.__class__(
            kind=model.kind, class_weight=1.0, seed=0, hyperparameters={},
            trees=(leaf, leaf, leaf),
        )
        assert predict_proba(stub, np.full(8, 0.5)) == (0.7, 0.3)

    def test_probabilities_sum_to_one(self):
        X, y = separable_fixture(60)
        model = fit_random_forest(X, y, {"n_estimators": 10}, w_plus=3.0)
        for row in X[:10]:
            p0, p1 = predict_proba(model, row)
            assert p0 + p1 == pytest.approx(1.0, abs=1e-12)
            assert 0.0 <= p1 <= 1.0


class TestLogisticRegression:
    def test_unregularized_separable(self):
        X, y = separable_fixture(100)
        model = fit_logistic_regression(X, y, {"C": 1e6, "l1_ratio": 0.0}, w_plus=1.0)
        predictions = (model.proba_ai(X) >= 0.5).astype(int)
        assert (predictions == y).all()

    def test_full_shrinkage_gives_weighted_base_rate(self):
        X, y = separable_fixture(80)
        y = np.array([0] * 60 + [1] * 20)
        w_plus = compute_class_weight(y)
        model = fit_logistic_regression(X, y, {"C": 1e-6, "l1_ratio": 1.0}, w_plus=w_plus)
        assert all(c == 0.0 for c in model.linear.coefficients)
        # Eq-5 weighting makes the weighted base rate exactly 1/2
        _, p1 = predict_proba(model, X[0])
        assert p1 == pytest.approx(0.5, abs=1e-6)

    def test_standardization_constants(self):
        X = np.tile([[0.25], [0.75]], (1, 8)) * np.ones((2, 8))
        y = np.array([0, 1])
        model = fit_logistic_regression(X, y, {"C": 1.0}, w_plus=1.0)
        assert model.linear.means == (0.5,) * 8
        assert model.linear.sds == (0.25,) * 8
        z = model.linear.standardize(np.array([[0.75] * 8]))
        assert z[0][0] == pytest.approx(1.0)

    def test_zero_variance_column_floored(self):
        X, y = separable_fixture(40)
        X[:, 0] = 0.5
        model = fit_logistic_regression(X, y, {"C": 1.0}, w_plus=1.0)
        assert model.linear.sds[0] == 1e-12
        z = model.linear.standardize(X)
        assert np.all(z[:, 0] == 0.0)

    def test_convergence_flag_recorded(self):
        X, y = separable_fixture(60)
        model = fit_logistic_regression(X, y, {"C": 1.0, "l1_ratio": 0.5}, w_plus=1.0)
        assert model.linear.converged
        assert model.linear.n_iter <= 5000


class TestPredictOps:
    def test_marker_vector_input(self):
        X, y = separable_fixture(60)
        model = fit_gradient_boosting(X, y, {"n_estimators": 5}, w_plus=1.0)
        vector = MarkerVector.from_values(X[0])
        p0, p1 = predict_proba(model, vector)
        assert p0 + p1 == pytest.approx(1.0)
        assert predict(model, vector) == int(p1 >= 0.5)


class TestPersistence:
    @pytest.mark.parametrize("fit,params", [
        (fit_gradient_boosting, {"n_estimators": 6, "max_depth": 3, "subsample": 0.8}),
        (fit_random_forest, {"n_estimators": 5, "max_depth": 4}),
        (fit_logistic_regression, {"C": 1.0, "l1_ratio": 0.5}),
    ])
    def test_bit_exact_round_trip(self, tmp_path, fit, params):
        X, y = separable_fixture(70, seed=2)
        model = fit(X, y, params, w_plus=compute_class_weight(y), seed=11)
        path = tmp_path / "model.json"
        save_model(model, path)
        reloaded = load_model(path)
        probe = np.random.default_rng(1).uniform(size=(100, 8))
        assert np.array_equal(model.proba_ai(probe), reloaded.proba_ai(probe))
        assert reloaded.version == model.version
        assert reloaded.kind == model.kind
        assert reloaded.class_weight == model.class_weight

    def test_instance_weights_shape(self):
        w = instance_weights(np.array([0, 1, 1]), 2.5)
        assert list(w) == [1.0, 2.5, 2.5]
