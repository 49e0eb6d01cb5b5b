import math

import numpy as np
import pytest

from notecnn.baseline import DecisionTree, best_split, fit_tree, load_forest, load_tfidf, rf_predict, rf_train, save_forest, save_tfidf, sweep_features, tfidf_fit, tfidf_transform
from notecnn.baseline.forest import as_csr
from notecnn.exceptions import ArgumentError, DataFormatError
from notecnn.schemas import ForestConfig


def test_tfidf_two_document_weights():
    docs = [["a", "b"], ["a"]]
    model = tfidf_fit(docs, 10)
    assert model.features == ("a", "b")
    X = tfidf_transform(docs, model).toarray()
    # idf(a) = 1, idf(b) = ln(3/2) + 1
    assert abs(X[0, 1] / X[0, 0] - (math.log(1.5) + 1.0)) < 1e-12
    assert abs(X[0, 1] / X[0, 0] - 1.4055) < 1e-4
    np.testing.assert_allclose(X[1], [1.0, 0.0], rtol=0, atol=1e-12)


def test_tfidf_rows_are_unit_length_or_empty():
    docs = [["heart", "failure", "heart"], ["lasix"], [], ["unseen"]]
    model = tfidf_fit(docs[:3], 10)
    X = tfidf_transform(docs, model)
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    np.testing.assert_allclose(norms[:2], [1.0, 1.0], rtol=0, atol=1e-12)
    assert X[2].nnz == 0 and X[3].nnz == 0
    assert abs(X[1, model.column["lasix"]] - 1.0) < 1e-12


def test_tfidf_ranking_breaks_ties_lexicographically():
    model = tfidf_fit([["b", "a", "c"], ["c"], ["d"]], 2)
    assert model.features == ("c", "a")
    assert model.df == (2, 1)


def test_tfidf_rejects_empty_corpus_and_zero_features():
    with pytest.raises(ArgumentError):
        tfidf_fit([], 5)
    with pytest.raises(ArgumentError):
        tfidf_fit([["a"]], 0)


def test_tfidf_model_file(tmp_path):
    model = tfidf_fit([["a", "b"], ["b"]], 5)
    path = str(tmp_path / "tfidf.json")
    save_tfidf(path, model, provenance={"config_hash": "abc", "seed": 1})
    assert load_tfidf(path) == model
    (tmp_path / "bad.json").write_text('{"features": ["a"], "df": [3], "n_docs": 1}')
    with pytest.raises(DataFormatError):
        load_tfidf(str(tmp_path / "bad.json"))


def test_best_split_respects_min_leaf():
    values = np.array([0.0, 1.0, 2.0, 3.0])
    y = np.array([1, 0, 0, 0])
    assert best_split(values, y, 1) == (0.0, 0.5)
    impurity, threshold = best_split(values, y, 2)
    assert threshold == 1.5 and impurity == pytest.approx(0.25)
    assert best_split(np.ones(4), y, 1) is None


def _separable(n=40):
    X = np.arange(n, dtype=np.float64)[:, None]
    return X, [i >= n // 2 for i in range(n)]


def test_separable_data_is_classified_perfectly():
    X, y = _separable()
    forest = rf_train(X, y, n_trees=5, seed=1, bootstrap=False, n_workers=1)
    predicted, proba = rf_predict(X, forest)
    assert predicted.tolist() == y
    assert forest.trees[0].n_nodes == 3
    assert forest.trees[0].threshold[0] == 19.5


def test_bootstrapped_forest_on_separable_data():
    X, y = _separable()
    predicted, _ = rf_predict(X, rf_train(X, y, n_trees=25, seed=4, n_workers=2))
    assert np.mean(predicted == np.asarray(y)) >= 0.9


def test_pure_sample_grows_a_single_leaf():
    X, _ = _separable()
    y = np.array([0] * 20 + [1] * 20)
    tree = fit_tree(X, y, np.random.Generator(np.random.PCG64(0)), sample=np.array([25, 30, 30, 39]))
    assert tree.n_nodes == 1
    assert tree.counts.tolist() == [[0, 4]]
    np.testing.assert_array_equal(tree.predict_proba(X), np.ones(40))


def _gini(p):
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _oracle_proba(X, y, rows, x):
    n = len(rows)
    pos = int(y[rows].sum())
    if pos == 0 or pos == n:
        return pos / n
    best = None
    for j in range(X.shape[1]):
        values = sorted(set(X[rows, j].tolist()))
        for a, b in zip(values, values[1:]):
            cut = (a + b) / 2.0
            goes_left = X[rows, j] <= cut
            left, right = rows[goes_left], rows[~goes_left]
            nl, nr = len(left), len(right)
            impurity = (nl * _gini(y[left].sum() / nl) + nr * _gini(y[right].sum() / nr)) / n
            if best is None or impurity < best[0]:
                best = (impurity, j, cut, left, right)
    if best is None:
        return pos / n
    _, j, cut, left, right = best
    return _oracle_proba(X, y, left if x[j] <= cut else right, x)


@pytest.mark.parametrize("seed", range(4))
def test_tree_matches_exhaustive_search(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.integers(0, 4, size=(30, 4)).astype(np.float64)
    y = rng.integers(0, 2, size=30)
    y[:2] = [0, 1]
    forest = rf_train(X, y.astype(bool), n_trees=1, seed=seed, features_per_split=4, bootstrap=False, n_workers=1)
    queries = np.vstack([X, rng.integers(0, 4, size=(20, 4)).astype(np.float64)])
    _, proba = rf_predict(queries, forest)
    expected = [_oracle_proba(X, y, np.arange(30), x) for x in queries]
    np.testing.assert_allclose(proba, expected, rtol=0, atol=1e-12)


def test_leaf_counts_cover_the_bootstrap_sample():
    rng = np.random.Generator(np.random.PCG64(9))
    X = rng.normal(size=(60, 5))
    y = (X[:, 0] + 0.5 * rng.normal(size=60) > 0).astype(np.int64)
    sample = rng.integers(0, 60, size=60)
    tree = fit_tree(X, y, rng, min_leaf=3, features_per_split=2, sample=sample)
    leaves = tree.feature == -1
    assert tree.counts[leaves].sum() == 60
    assert tree.counts[leaves].sum(axis=1).min() >= 3
    np.testing.assert_array_equal(tree.counts[0], np.bincount(y[sample], minlength=2))
    fractions = tree.leaf_fraction()[tree.apply(as_csr(X))]
    np.testing.assert_array_equal(tree.predict_proba(X), fractions)


def test_max_depth_limits_the_tree():
    rng = np.random.Generator(np.random.PCG64(2))
    X = rng.normal(size=(80, 3))
    y = rng.integers(0, 2, size=80).astype(bool)
    forest = rf_train(X, y, n_trees=4, seed=0, max_depth=2, n_workers=1)
    assert max(tree.depth for tree in forest.trees) <= 2


def test_forest_is_independent_of_worker_count():
    rng = np.random.Generator(np.random.PCG64(5))
    X = rng.normal(size=(50, 6))
    y = (X[:, 1] > 0).tolist()
    serial = rf_train(X, y, n_trees=8, seed=11, n_workers=1)
    threaded = rf_train(X, y, n_trees=8, seed=11, n_workers=4)
    for a, b in zip(serial.trees, threaded.trees):
        np.testing.assert_array_equal(a.feature, b.feature)
        np.testing.assert_array_equal(a.threshold, b.threshold)
    np.testing.assert_array_equal(rf_predict(X, serial)[1], rf_predict(X, threaded)[1])


def test_single_class_or_single_sample_is_rejected():
    with pytest.raises(ArgumentError, match="both classes"):
        rf_train(np.zeros((4, 2)), [True] * 4)
    with pytest.raises(ArgumentError):
        rf_train(np.zeros((1, 2)), [True])


def test_even_vote_is_labeled_negative():
    stump = DecisionTree(feature=np.array([-1]), threshold=np.zeros(1), left=np.array([-1]), right=np.array([-1]), counts=np.array([[2, 2]]))
    forest = rf_train(np.array([[0.0], [1.0]]), [False, True], n_trees=1, bootstrap=False, n_workers=1)
    forest.trees = [stump]
    predicted, proba = rf_predict(np.zeros((3, 1)), forest)
    assert proba.tolist() == [0.5] * 3 and not predicted.any()


def test_forest_checkpoint(tmp_path):
    rng = np.random.Generator(np.random.PCG64(3))
    X = rng.normal(size=(40, 4))
    y = (X[:, 2] > 0).tolist()
    forest = rf_train(X, y, n_trees=6, seed=2, n_workers=1)
    features = ["w", "x", "y", "z"]
    path = str(tmp_path / "rf.ncrf")
    save_forest(path, forest, features, provenance={"config_hash": "abc", "seed": 2})
    loaded, header = load_forest(path, features)
    assert header["provenance"]["seed"] == 2 and loaded.n_trees == 6
    np.testing.assert_array_equal(rf_predict(X, loaded)[1], rf_predict(X, forest)[1])
    with pytest.raises(DataFormatError, match="different feature list"):
        load_forest(path, ["w", "x", "y", "q"])


def test_sweep_prefers_fewer_features_on_ties():
    train_docs = [["yes", "common"]] * 10 + [["no", "common"]] * 10
    labels = [True] * 10 + [False] * 10
    config = ForestConfig(n_trees=3, bootstrap=False, feature_counts=[5, 2], n_workers=1)
    result = sweep_features(train_docs, labels, train_docs[::2], labels[::2], config.feature_counts, config, seed=0)
    assert result.report.f1 == 1.0
    assert result.n_features == 2
    assert result.tfidf.features == ("common", "no")


@pytest.mark.parametrize("seed", range(3))
def test_tree_beats_majority_on_its_bootstrap_sample(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.normal(size=(80, 6))
    y = (X[:, 0] + X[:, 1] + rng.normal(size=80) > 0).astype(np.int64)
    sample = rng.integers(0, 80, size=80)
    tree = fit_tree(X, y, rng, features_per_split=3, sample=sample)
    predicted = tree.predict_proba(X[sample]) > 0.5
    majority = max(np.mean(y[sample]), 1 - np.mean(y[sample]))
    assert np.mean(predicted == y[sample].astype(bool)) >= majority


def _diagonal(rng, n):
    X = rng.uniform(-1.0, 1.0, size=(n, 2))
    return X, (X[:, 0] + X[:, 1] > 0).tolist()


def test_forest_is_at_least_as_accurate_as_a_single_tree():
    forest_accuracy, tree_accuracy = [], []
    for seed in range(20):
        rng = np.random.Generator(np.random.PCG64([seed, 99]))
        X, y = _diagonal(rng, 80)
        X_test, y_test = _diagonal(rng, 400)
        for n_trees, scores in ((50, forest_accuracy), (1, tree_accuracy)):
            predicted, _ = rf_predict(X_test, rf_train(X, y, n_trees=n_trees, seed=seed, n_workers=2))
            scores.append(np.mean(predicted == np.asarray(y_test)))
    assert np.mean(forest_accuracy) >= np.mean(tree_accuracy)


@pytest.mark.parametrize("seed", range(5))
def test_every_split_lowers_weighted_gini(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.integers(0, 5, size=(70, 4)).astype(np.float64)
    y = (X[:, 0] + rng.normal(size=70) > 2).tolist()
    for tree in rf_train(X, y, n_trees=5, seed=seed, min_leaf=2, n_workers=1).trees:
        for node in np.flatnonzero(tree.feature != -1):
            parent, left, right = tree.counts[node], tree.counts[tree.left[node]], tree.counts[tree.right[node]]
            np.testing.assert_array_equal(left + right, parent)
            children = (left.sum() * _gini(left[1] / left.sum()) + right.sum() * _gini(right[1] / right.sum())) / parent.sum()
            assert children <= _gini(parent[1] / parent.sum()) + 1e-12
