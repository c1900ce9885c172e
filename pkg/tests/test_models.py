"""Model kernels: isolation forest, random forest, logistic, NB, GBT."""

import numpy as np
import pytest

from coldstart_al.models import (
    BoostedTreesModel,
    IsolationForest,
    LogisticModel,
    NaiveBayesModel,
    RandomForest,
    SingleClassError,
    average_path_length,
    loss_and_gradient,
)
from coldstart_al.models import trees as tree_mod
from coldstart_al.models import _kernels


def two_clusters(rng, n=200, gap=6.0, d=4):
    X = rng.normal(size=(n, d))
    y = (rng.random(n) < 0.5).astype(int)
    X[y == 1, 0] += gap
    return X, y


class TestAveragePathLength:
    def test_small_values(self):
        assert average_path_length(0) == 0.0
        assert average_path_length(1) == 0.0
        assert average_path_length(2) == 1.0

    def test_formula(self):
        gamma = 0.5772156649015329
        n = 100
        expected = 2.0 * (np.log(n - 1) + gamma) - 2.0 * (n - 1) / n
        assert average_path_length(n) == pytest.approx(expected, rel=1e-12)

    def test_monotone(self):
        vals = [average_path_length(n) for n in range(2, 300)]
        assert np.all(np.diff(vals) > 0)


class TestIsolationForest:
    def test_sample_size_clamped_small(self, rng):
        X = rng.normal(size=(100, 3))
        assert IsolationForest.fit(X, seed=0).sample_size == 100

    def test_sample_size_clamped_large(self, rng):
        X = rng.normal(size=(10_000, 3))
        assert IsolationForest.fit(X, seed=0).sample_size == 256

    def test_seeded_determinism(self, rng):
        X = rng.normal(size=(300, 4))
        probe = rng.normal(size=(50, 4))
        a = IsolationForest.fit(X, seed=42).score(probe)
        b = IsolationForest.fit(X, seed=42).score(probe)
        np.testing.assert_array_equal(a, b)

    def test_identical_points_score_half(self):
        # every tree truncates at the root, so E[h] = c(n) exactly
        X = np.ones((100, 3))
        model = IsolationForest.fit(X, seed=1)
        np.testing.assert_allclose(model.score(np.ones((1, 3))), 0.5, atol=1e-12)

    def test_planted_outlier_beats_all_inliers(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            X = rng.normal(size=(1000, 4))
            outlier = np.full((1, 4), 100.0)
            model = IsolationForest.fit(np.vstack([X, outlier]), seed=seed)
            scores = model.score(np.vstack([X, outlier]))
            assert scores[-1] > scores[:-1].max()

    def test_dense_duplicate_scores_below_outlier(self, rng):
        X = rng.normal(size=(500, 3))
        dense = X[0:1].copy()
        outlier = np.full((1, 3), 100.0)
        model = IsolationForest.fit(np.vstack([X, outlier]), seed=3)
        s_dense, s_out = model.score(np.vstack([dense, outlier]))
        assert s_dense < s_out

    def test_far_point_beats_median_every_seed(self, rng):
        X = rng.normal(size=(400, 3))
        diag = np.linalg.norm(X.max(0) - X.min(0))
        far = (X.max(0) + 10.0 * diag)[None, :]
        for seed in range(5):
            model = IsolationForest.fit(X, seed=seed)
            assert model.score(far)[0] > np.median(model.score(X))

    def test_scores_in_unit_interval(self, rng):
        X = rng.normal(size=(200, 3))
        s = IsolationForest.fit(X, seed=0).score(X)
        assert np.all((s > 0) & (s < 1))

    def test_dimension_mismatch(self, rng):
        model = IsolationForest.fit(rng.normal(size=(50, 3)), seed=0)
        with pytest.raises(ValueError):
            model.score(rng.normal(size=(5, 2)))

    def test_empty_data_rejected(self):
        with pytest.raises(ValueError):
            IsolationForest.fit(np.empty((0, 3)))


class TestRandomForest:
    def test_separable_clusters_perfect_training_accuracy(self, rng):
        X, y = two_clusters(rng)
        model = RandomForest.fit(X, y, n_trees=50, max_depth=3, seed=0)
        acc = ((model.predict_proba(X) > 0.5).astype(int) == y).mean()
        assert acc == 1.0

    def test_seeded_determinism(self, rng):
        X, y = two_clusters(rng, gap=1.0)
        a = RandomForest.fit(X, y, n_trees=30, max_depth=3, seed=9).predict_proba(X)
        b = RandomForest.fit(X, y, n_trees=30, max_depth=3, seed=9).predict_proba(X)
        np.testing.assert_array_equal(a, b)

    def test_single_class_rejected(self, rng):
        X = rng.normal(size=(20, 3))
        with pytest.raises(SingleClassError):
            RandomForest.fit(X, np.zeros(20, dtype=int), n_trees=5, max_depth=2)

    def test_tree_probas_mean_equals_predict(self, rng):
        X, y = two_clusters(rng, gap=1.5)
        model = RandomForest.fit(X, y, n_trees=40, max_depth=3, seed=2)
        per_tree = model.tree_probas(X)
        assert per_tree.shape == (len(X), 40)
        np.testing.assert_allclose(per_tree.mean(axis=1), model.predict_proba(X), atol=1e-12)

    def test_single_tree_forest(self, rng):
        X, y = two_clusters(rng, n=60)
        model = RandomForest.fit(X, y, n_trees=1, max_depth=3, seed=0)
        np.testing.assert_allclose(
            model.tree_probas(X)[:, 0], model.predict_proba(X), atol=1e-15
        )

    def test_pure_leaf_forest_outputs_binary(self, rng):
        X, y = two_clusters(rng, n=100, gap=20.0, d=2)
        model = RandomForest.fit(X, y, n_trees=10, max_depth=4, seed=0)
        probas = model.tree_probas(X)
        assert np.all((probas == 0.0) | (probas == 1.0))

    def test_probabilities_bounded(self, rng):
        X, y = two_clusters(rng, gap=0.5)
        p = RandomForest.fit(X, y, n_trees=20, max_depth=3, seed=1).predict_proba(X)
        assert np.all((p >= 0) & (p <= 1))

    def test_depth_cap_respected(self, rng):
        X, y = two_clusters(rng, gap=0.3)
        model = RandomForest.fit(X, y, n_trees=20, max_depth=3, seed=1)
        assert max(t.max_depth() for t in model.trees) <= 3

    def test_min_samples_leaf_respected(self, rng):
        X, y = two_clusters(rng, gap=0.5)
        model = RandomForest.fit(
            X, y, n_trees=10, max_depth=6, seed=1, min_samples_leaf=25
        )
        for tree in model.trees:
            leaf_sizes = tree.n_node[tree.split_feature < 0]
            assert leaf_sizes.min() >= 25

    def test_class_weighting_shifts_minority_probability(self, rng):
        X = rng.normal(size=(400, 3))
        y = (rng.random(400) < 0.05).astype(int)
        X[y == 1, 0] += 1.0
        plain = RandomForest.fit(X, y, n_trees=40, max_depth=3, seed=0)
        weighted = RandomForest.fit(
            X, y, n_trees=40, max_depth=3, seed=0, class_weight="balanced"
        )
        assert weighted.predict_proba(X[y == 1]).mean() > plain.predict_proba(X[y == 1]).mean()

    def test_feature_importances_normalized(self, rng):
        X, y = two_clusters(rng)
        model = RandomForest.fit(X, y, n_trees=20, max_depth=3, seed=0)
        imp = model.feature_importances_
        assert imp.shape == (X.shape[1],)
        assert imp.sum() == pytest.approx(1.0, abs=1e-9)
        assert imp.argmax() == 0  # the informative feature


class TestSplitSearchPaths:
    """The numba scan and the numpy reference must choose identical splits."""

    def test_gini_paths_agree(self, rng):
        if not _kernels.HAVE_NUMBA:
            pytest.skip("numba unavailable")
        for _ in range(200):
            m = int(rng.integers(4, 80))
            f = int(rng.integers(1, 5))
            A = rng.normal(size=(m, f))
            w = rng.uniform(0.5, 2.0, size=m)
            wy = w * (rng.random(m) < 0.4)
            msl = int(rng.integers(1, 4))
            a = tree_mod._gini_best_split_numpy(A, w, wy, msl)
            b = tree_mod.best_gini_split(A, w, wy, msl)
            if a is None:
                assert b is None
            else:
                assert b is not None
                assert a[0] == b[0]
                assert a[1] == pytest.approx(b[1], abs=1e-12)
                assert a[2] == pytest.approx(b[2], rel=1e-9)

    def test_mse_paths_agree(self, rng):
        if not _kernels.HAVE_NUMBA:
            pytest.skip("numba unavailable")
        for _ in range(200):
            m = int(rng.integers(4, 80))
            f = int(rng.integers(1, 5))
            A = rng.normal(size=(m, f))
            r = rng.normal(size=m)
            a = tree_mod._mse_best_split_numpy(A, r)
            b = tree_mod.best_mse_split(A, r)
            if a is None:
                assert b is None
            else:
                assert b is not None
                assert a[0] == b[0]
                assert a[1] == pytest.approx(b[1], abs=1e-12)


class TestLogistic:
    def test_zero_model_predicts_half(self):
        model = LogisticModel(weights=np.zeros(3), bias=0.0, l2_lambda=0.0)
        np.testing.assert_allclose(model.predict_proba(np.ones((5, 3))), 0.5)

    def test_separable_1d(self):
        X = np.array([[-2.0], [-1.5], [-1.0], [1.0], [1.5], [2.0]])
        y = np.array([0, 0, 0, 1, 1, 1])
        model = LogisticModel.fit(X, y, l2_lambda=1e-6)
        acc = ((model.predict_proba(X) > 0.5).astype(int) == y).mean()
        assert acc == 1.0

    def test_gradient_matches_finite_differences(self, rng):
        """Central finite differences as the independent oracle."""
        X = rng.normal(size=(40, 5))
        y = (rng.random(40) < 0.5).astype(float)
        w = rng.normal(size=5) * 0.5
        b = 0.3
        lam = 0.01
        _, grad_w, grad_b = loss_and_gradient(w, b, X, y, lam)
        h = 1e-6
        for j in range(5):
            e = np.zeros(5)
            e[j] = h
            f_plus, _, _ = loss_and_gradient(w + e, b, X, y, lam)
            f_minus, _, _ = loss_and_gradient(w - e, b, X, y, lam)
            numeric = (f_plus - f_minus) / (2 * h)
            assert grad_w[j] == pytest.approx(numeric, rel=1e-5, abs=1e-8)
        f_plus, _, _ = loss_and_gradient(w, b + h, X, y, lam)
        f_minus, _, _ = loss_and_gradient(w, b - h, X, y, lam)
        assert grad_b == pytest.approx((f_plus - f_minus) / (2 * h), rel=1e-5, abs=1e-8)

    def test_objective_not_worse_than_zero_model(self, rng):
        X = rng.normal(size=(60, 4))
        y = (rng.random(60) < 0.3).astype(float)
        lam = 0.1
        model = LogisticModel.fit(X, y, l2_lambda=lam)
        at_fit, _, _ = loss_and_gradient(model.weights, model.bias, X, y, lam)
        at_zero, _, _ = loss_and_gradient(np.zeros(4), 0.0, X, y, lam)
        assert at_fit <= at_zero

    def test_single_class_rejected(self, rng):
        with pytest.raises(SingleClassError):
            LogisticModel.fit(rng.normal(size=(10, 2)), np.ones(10))

    def test_non_finite_features_rejected(self):
        X = np.array([[1.0], [np.inf]])
        with pytest.raises(ValueError):
            LogisticModel.fit(X, np.array([0, 1]))

    def test_parameters_finite(self, rng):
        X, y = two_clusters(rng, gap=12.0, d=2)  # separable pushes weights up
        model = LogisticModel.fit(X, y, l2_lambda=1e-4)
        assert np.all(np.isfinite(model.weights)) and np.isfinite(model.bias)


class TestNaiveBayes:
    def test_symmetric_midpoint(self):
        X = np.array([[-2.0], [-1.0], [1.0], [2.0]])
        y = np.array([0, 0, 1, 1])
        model = NaiveBayesModel.fit(X, y)
        assert model.predict_proba(np.array([[0.0]]))[0] == pytest.approx(0.5, abs=1e-12)

    def test_priors_sum_to_one(self, rng):
        X, y = two_clusters(rng)
        model = NaiveBayesModel.fit(X, y)
        assert model.priors.sum() == pytest.approx(1.0, abs=1e-12)

    def test_variance_floor_applied(self):
        X = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 4.0], [1.0, 5.0]])
        y = np.array([0, 0, 1, 1])
        model = NaiveBayesModel.fit(X, y)  # first feature constant per class
        assert np.all(model.variances > 0)
        p = model.predict_proba(np.array([[1.0, 2.5]]))
        assert np.isfinite(p).all()

    def test_single_class_rejected(self, rng):
        with pytest.raises(SingleClassError):
            NaiveBayesModel.fit(rng.normal(size=(5, 2)), np.zeros(5))


class TestBoostedTrees:
    def test_zero_estimators_predict_prior(self, rng):
        X = rng.normal(size=(50, 3))
        y = (rng.random(50) < 0.3).astype(int)
        model = BoostedTreesModel.fit(X, y, n_estimators=0)
        np.testing.assert_allclose(model.predict_proba(X), y.mean(), atol=1e-12)

    def test_staged_loss_non_increasing(self, rng):
        X, y = two_clusters(rng, gap=1.0)
        model = BoostedTreesModel.fit(X, y, n_estimators=100)
        losses = np.array(model.train_losses)
        assert len(losses) == 101
        assert np.all(np.diff(losses) <= 1e-12)

    def test_deterministic(self, rng):
        X, y = two_clusters(rng, gap=1.0)
        a = BoostedTreesModel.fit(X, y, n_estimators=30).predict_proba(X)
        b = BoostedTreesModel.fit(X, y, n_estimators=30).predict_proba(X)
        np.testing.assert_array_equal(a, b)

    def test_learns_separable_data(self, rng):
        X, y = two_clusters(rng, gap=4.0)
        model = BoostedTreesModel.fit(X, y, n_estimators=50)
        acc = ((model.predict_proba(X) > 0.5).astype(int) == y).mean()
        assert acc > 0.97

    def test_single_class_rejected(self, rng):
        with pytest.raises(SingleClassError):
            BoostedTreesModel.fit(rng.normal(size=(10, 2)), np.zeros(10))
