import itertools
import json
import math

import numpy as np
import pytest

from loadshift.errors import DataError, InputError
from loadshift.learners import (
    AdaBoostModel,
    AdaBoostSpec,
    ForestModel,
    ForestSpec,
    GbdtSpec,
    KnnSpec,
    LogitSpec,
    TreeSpec,
    auc,
    default_grid,
    fit_classifier,
    grid_search,
    load_grid,
    model_to_bytes,
    mse,
    save_model,
    load_model,
    validate_spec,
)
from loadshift.learners.models import Stump, sigmoid
from loadshift.learners.serialize import model_from_dict, model_to_dict
from synth import synth_classification

ALL_SPECS = [
    LogitSpec(l2_lambda=0.1),
    KnnSpec(k=5),
    TreeSpec(max_depth=4, min_leaf=2),
    ForestSpec(n_trees=12, max_depth=4, min_leaf=2),
    AdaBoostSpec(n_rounds=15),
    GbdtSpec(n_rounds=12, max_depth=2),
]


class TestFitBasics:
    def test_logit_symmetric_data_zero_intercept(self):
        rng = np.random.default_rng(0)
        half = rng.normal(size=(40, 3)) + 1.0
        X = np.vstack([half, -half])
        y = np.array([1] * 40 + [0] * 40)
        model = fit_classifier(LogitSpec(max_iters=2000), X, y)
        assert abs(model.intercept) < 1e-6

    def test_stump_separates_1d(self):
        X = np.array([[0.0], [1.0], [2.0], [10.0], [11.0], [12.0]])
        y = np.array([0, 0, 0, 1, 1, 1])
        model = fit_classifier(TreeSpec(max_depth=1, min_leaf=1), X, y)
        preds = (model.predict_proba(X) >= 0.5).astype(int)
        assert np.array_equal(preds, y)

    def test_gbdt_learns_xor(self):
        # oracle first: some depth-2 axis-aligned stump pair labels XOR exactly
        def depth2_tree_fits_xor():
            pts = np.array([[-1, -1], [-1, 1], [1, -1], [1, 1]], dtype=float)
            target = np.array([0, 1, 1, 0])
            for j1, j2 in itertools.product((0, 1), repeat=2):
                pred = np.array(
                    [float((p[j1] <= 0.0) == (p[j2] <= 0.0)) for p in pts]
                )
                if np.array_equal(pred, target) or np.array_equal(1 - pred, target):
                    return True
            return False

        assert depth2_tree_fits_xor()

        rng = np.random.default_rng(3)
        X = rng.uniform(-1, 1, size=(200, 2))
        y = ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(np.int64)
        flip = rng.random(200) < 0.05
        y[flip] = 1 - y[flip]
        model = fit_classifier(GbdtSpec(n_rounds=50, max_depth=2, learning_rate=0.3), X, y)
        assert auc(model.predict_proba(X), y) > 0.95

    def test_single_class_rejected_except_knn(self):
        X = np.ones((10, 2))
        y = np.ones(10, dtype=np.int64)
        with pytest.raises(DataError):
            fit_classifier(LogitSpec(), X, y)
        model = fit_classifier(KnnSpec(k=3), X, y)
        assert model.predict_proba(np.ones(2)) == 1.0

    def test_nonfinite_features_rejected(self):
        X = np.ones((10, 2))
        X[3, 1] = np.nan
        y = np.array([0, 1] * 5)
        with pytest.raises(DataError):
            fit_classifier(TreeSpec(), X, y)

    def test_spec_validation(self):
        with pytest.raises(InputError):
            validate_spec(KnnSpec(k=0))
        with pytest.raises(InputError):
            validate_spec(ForestSpec(feature_subsample=1.5))


class TestPredictProba:
    def test_knn_two_of_three(self):
        X = np.array([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [5.0, 5.0]])
        y = np.array([1, 1, 0, 0])
        model = fit_classifier(KnnSpec(k=3), X, y)
        assert model.predict_proba(np.array([0.0, 0.0])) == pytest.approx(2 / 3)

    def test_forest_of_identical_trees_equals_single(self):
        X, y = synth_classification(n=60, m=4, seed=1)
        single = fit_classifier(TreeSpec(max_depth=3, min_leaf=2), X, y)
        forest = ForestModel(
            ForestSpec(n_trees=3), [single.tree, single.tree, single.tree], X.shape[1]
        )
        assert np.allclose(forest.predict_proba(X), single.predict_proba(X), atol=1e-12)

    def test_adaboost_vote_share(self):
        stumps = [Stump(0, 0.5, True, 1.0), Stump(0, 0.5, False, 1.0)]
        model = AdaBoostModel(AdaBoostSpec(), stumps, 1)
        # first stump votes positive (x <= 0.5), second votes negative
        assert model.predict_proba(np.array([0.0])) == pytest.approx(0.5)

    def test_probability_range_all_families(self):
        X, y = synth_classification(n=80, m=5, seed=2)
        probe = np.random.default_rng(9).normal(scale=3.0, size=(200, 5))
        for spec in ALL_SPECS:
            model = fit_classifier(spec, X, y, seed=4)
            p = model.predict_proba(probe)
            assert np.all(p >= 0.0) and np.all(p <= 1.0), spec.family

    def test_width_mismatch(self):
        X, y = synth_classification(n=40, m=4, seed=0)
        model = fit_classifier(TreeSpec(), X, y)
        with pytest.raises(InputError):
            model.predict_proba(np.ones(5))


class TestLearnerInvariants:
    def test_forest_single_tree_equals_tree(self):
        X, y = synth_classification(n=100, m=5, seed=5)
        tree = fit_classifier(TreeSpec(max_depth=4, min_leaf=3), X, y, seed=7)
        forest = fit_classifier(
            ForestSpec(
                n_trees=1, max_depth=4, min_leaf=3, feature_subsample=1.0, bootstrap=False
            ),
            X,
            y,
            seed=7,
        )
        probe = np.random.default_rng(0).normal(size=(300, 5))
        assert np.array_equal(forest.predict_proba(probe), tree.predict_proba(probe))

    def test_gbdt_zero_learning_rate(self):
        X, y = synth_classification(n=90, m=4, seed=6)
        model = fit_classifier(GbdtSpec(n_rounds=10, learning_rate=0.0), X, y)
        probe = np.random.default_rng(1).normal(size=(50, 4))
        assert np.allclose(model.predict_proba(probe), y.mean(), atol=1e-9)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.family)
    def test_serialization_round_trip(self, spec):
        X, y = synth_classification(n=70, m=4, seed=11)
        model = fit_classifier(spec, X, y, seed=3)
        clone = model_from_dict(json.loads(json.dumps(model_to_dict(model))))
        probe = np.random.default_rng(2).normal(size=(1000, 4))
        assert np.array_equal(model.predict_proba(probe), clone.predict_proba(probe))

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.family)
    def test_seed_determinism_bytes(self, spec):
        X, y = synth_classification(n=70, m=4, seed=12)
        a = model_to_bytes(fit_classifier(spec, X, y, seed=42))
        b = model_to_bytes(fit_classifier(spec, X, y, seed=42))
        assert a == b

    def test_save_load_file(self, tmp_path):
        X, y = synth_classification(n=50, m=3, seed=1)
        model = fit_classifier(GbdtSpec(n_rounds=5), X, y)
        path = tmp_path / "m.json"
        save_model(model, path, feature_names=["a", "b", "c"])
        clone, names = load_model(path)
        assert names == ["a", "b", "c"]
        assert np.array_equal(model.predict_proba(X), clone.predict_proba(X))


def _pairwise_auc_oracle(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


class TestAuc:
    def test_perfect_ranking(self):
        assert auc([0.9, 0.1], [1, 0]) == 1.0

    def test_all_ties(self):
        assert auc([0.3, 0.3, 0.3, 0.3], [1, 0, 1, 0]) == 0.5

    def test_hand_counted_case(self):
        assert auc([0.8, 0.3, 0.6, 0.2], [1, 1, 0, 0]) == 0.75

    def test_single_class_rejected(self):
        with pytest.raises(DataError):
            auc([0.1, 0.2], [1, 1])

    def test_matches_pairwise_oracle_with_ties(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(4, 30))
            scores = rng.choice([0.1, 0.25, 0.5, 0.8], size=n)
            labels = rng.integers(0, 2, size=n)
            if labels.sum() in (0, n):
                labels[0] = 1 - labels[0]
            assert auc(scores, labels) == _pairwise_auc_oracle(scores, labels)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(4)
        scores = rng.normal(size=60)
        labels = rng.integers(0, 2, size=60)
        labels[0], labels[1] = 0, 1
        base = auc(scores, labels)
        assert auc(np.exp(scores), labels) == base
        assert auc(3.0 * scores + 11.0, labels) == base


class TestMse:
    def test_profile_equals_cycle(self):
        assert mse([5.0, 7.0], [[5.0, 7.0]]) == 0.0

    def test_hand_computed(self):
        assert mse([1.0, 3.0], [[0.0, 0.0]]) == 5.0

    def test_mean_invariance_identical_cycles(self):
        one = mse([2.0, 4.0], [[1.0, 5.0]])
        two = mse([2.0, 4.0], [[1.0, 5.0], [1.0, 5.0]])
        assert one == two

    def test_short_cycle_zero_padded(self):
        # second position compares against 0
        assert mse([1.0, 3.0], [[1.0]]) == pytest.approx(9.0 / 2)

    def test_no_cycles(self):
        with pytest.raises(DataError):
            mse([1.0], [])


class TestGridSearch:
    def _data(self):
        X, y = synth_classification(n=80, m=4, seed=21)
        return (X[:60], y[:60]), (X[60:], y[60:])

    def test_single_spec_chosen(self):
        train, val = self._data()
        report = grid_search([LogitSpec()], train, val, seed=0)
        assert report.chosen == LogitSpec()
        assert report.combination_count == 1

    def test_default_grid_count(self):
        grid = default_grid()
        assert len(grid) == 87
        by_family = {}
        for spec in grid:
            by_family[spec.family] = by_family.get(spec.family, 0) + 1
        assert by_family == {"logit": 6, "knn": 18, "forest": 24, "adaboost": 15, "gbdt": 24}

    def test_tie_goes_to_first(self):
        train, val = self._data()
        # two identical specs tie exactly; enumeration order must win
        grid = [KnnSpec(k=3), KnnSpec(k=3, distance_weighted=False)]
        report = grid_search(grid, train, val, seed=0)
        assert report.chosen is grid[0]

    def test_empty_grid(self):
        train, val = self._data()
        with pytest.raises(InputError):
            grid_search([], train, val)

    def test_single_class_validation(self):
        (Xt, yt), (Xv, yv) = self._data()
        with pytest.raises(DataError):
            grid_search([LogitSpec()], (Xt, yt), (Xv, np.zeros_like(yv)))

    def test_parallel_matches_serial(self):
        train, val = self._data()
        grid = [LogitSpec(), KnnSpec(k=3), TreeSpec(max_depth=3, min_leaf=2)]
        serial = grid_search(grid, train, val, seed=5, jobs=1)
        parallel = grid_search(grid, train, val, seed=5, jobs=2)
        assert [a for _, a in serial.entries] == [a for _, a in parallel.entries]
        assert serial.chosen == parallel.chosen

    def test_grid_file_loading(self, tmp_path):
        path = tmp_path / "grid.json"
        path.write_text(json.dumps({"logit": {"l2_lambda": [0.0, 1.0]}, "knn": {"k": [3]}}))
        grid = load_grid(path)
        assert len(grid) == 3
        assert grid[0] == LogitSpec(l2_lambda=0.0)
        assert grid[2] == KnnSpec(k=3)
