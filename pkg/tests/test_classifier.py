from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.svm import SVC
from sklearn.tree import DecisionTreeClassifier

from earlyrumor.classifier import (
    Dataset,
    DatasetError,
    SingleClassError,
    TooFewEventsError,
    UnnormalizedDataError,
    accuracy_over_time,
    best_set,
    cross_validate,
    cv_permutation_importance,
    fit_pipeline,
    forest_from_json,
    forest_to_json,
    permutation_importance,
    rbf_kernel,
    stratified_folds,
    svm_from_json,
    svm_to_json,
    train_random_forest,
    train_svm_rbf,
)
from earlyrumor.classifier.forest import bootstrap_weights


def separable(n=50, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, 2)) + [2.0, 2.0]
    b = rng.normal(size=(n, 2)) - [2.0, 2.0]
    # keep a margin of at least 1 around the line x + y = 0
    a[a.sum(axis=1) < 1.0] += 2.0
    b[b.sum(axis=1) > -1.0] -= 2.0
    return np.vstack([a, b]), np.array([1] * n + [0] * n)


def noisy(n=120, p=6, seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = rng.normal(size=(n, p))
    X[:, 0] += 1.5 * (2 * y - 1)
    return X, y


# --------------------------------------------------------------------- folds

@pytest.mark.parametrize("n_per_class", [10, 23, 50])
def test_folds_partition_and_stratify(n_per_class):
    y = np.array([0] * n_per_class + [1] * n_per_class)
    folds = stratified_folds(y, 10, seed=3)
    assert folds.shape == y.shape and set(folds.tolist()) == set(range(10))
    sizes = np.bincount(folds, minlength=10)
    assert sizes.max() - sizes.min() <= 1
    for cls in (0, 1):
        per = np.bincount(folds[y == cls], minlength=10)
        assert per.max() - per.min() <= 1
    if n_per_class == 50:
        assert np.all(sizes == 10)


@given(st.integers(10, 40), st.integers(10, 40), st.integers(0, 100))
def test_folds_property(n0, n1, seed):
    y = np.array([0] * n0 + [1] * n1)
    folds = stratified_folds(y, 10, seed)
    assert np.all((folds >= 0) & (folds < 10))
    sizes = np.bincount(folds, minlength=10)
    assert sizes.max() - sizes.min() <= 1


def test_folds_too_few():
    with pytest.raises(TooFewEventsError):
        stratified_folds(np.array([0] * 9 + [1] * 20))


# --------------------------------------------------------------------- forest

def test_forest_separable_toy():
    X, y = separable()
    forest = train_random_forest(X, y, n_trees=50, seed=1)
    assert np.all(forest.predict(X) == y) and forest.oob_accuracy > 0.9


def test_single_tree_is_bootstrapped_cart():
    X, y = noisy()
    forest = train_random_forest(X, y, n_trees=1, seed=5)
    s = int(np.random.default_rng(5).integers(0, 2**31 - 1, size=1)[0])
    uniq = np.unique(np.column_stack([X, y]), axis=0)
    ux, uy = uniq[:, :-1], uniq[:, -1].astype(int)
    w = bootstrap_weights(np.ones(len(ux)), np.random.default_rng(s))
    cart = DecisionTreeClassifier(max_features="sqrt", random_state=s)
    cart.fit(ux[w > 0].astype(np.float32), uy[w > 0], sample_weight=w[w > 0])
    grid = np.random.default_rng(9).normal(size=(500, X.shape[1]))
    assert np.array_equal(forest.predict(grid), cart.predict(grid.astype(np.float32)))


def test_forest_duplicate_invariance():
    X, y = noisy()
    a = train_random_forest(X, y, n_trees=30, seed=2)
    b = train_random_forest(np.vstack([X, X]), np.concatenate([y, y]), n_trees=30, seed=2)
    assert np.array_equal(a.predict(X), b.predict(X))


def test_forest_votes_recomputable_and_serialised():
    X, y = noisy()
    forest = train_random_forest(X, y, n_trees=25, seed=3)

    def walk(tree, x):
        node = 0
        while tree.feature[node] >= 0:
            node = tree.left[node] if x[tree.feature[node]] <= tree.threshold[node] else tree.right[node]
        return tree.leaf_class[node]

    votes = np.array([sum(walk(t, x) for t in forest.trees) for x in X])
    assert np.array_equal(forest.votes(X), votes)
    assert np.array_equal(forest.predict(X), (2 * votes >= 25).astype(int))
    clone = forest_from_json(forest_to_json(forest))
    assert np.array_equal(clone.votes(X), votes)
    assert forest_to_json(clone) == forest_to_json(forest)


def test_forest_determinism_and_errors():
    X, y = noisy()
    a = train_random_forest(X, y, n_trees=20, seed=4)
    b = train_random_forest(X, y, n_trees=20, seed=4)
    assert forest_to_json(a) == forest_to_json(b)
    with pytest.raises(SingleClassError):
        train_random_forest(X, np.zeros(len(y), dtype=int))
    with pytest.raises(DatasetError):
        train_random_forest(np.full((4, 2), np.nan), [0, 1, 0, 1])


# --------------------------------------------------------------------- svm

def test_svm_xor():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([0, 0, 1, 1])
    model = train_svm_rbf(X, y, C=10.0, gamma=0.5)
    assert np.all(model.predict(X) == y)
    f = rbf_kernel(X, model.support_vectors, 0.5) @ model.dual_coef + model.bias
    np.testing.assert_array_equal(f, model.decision_function(X))


def test_svm_tiny_c_is_nearly_constant():
    X, y = noisy()
    # unequal classes: with balanced ones the sign of a flat function still
    # follows the kernel-weighted class vote (the reference solver agrees)
    keep = np.r_[np.flatnonzero(y == 0), np.flatnonzero(y == 1)[:30]]
    X, y = X[keep], y[keep]
    X = (X - X.mean(0)) / X.std(0)
    model = train_svm_rbf(X, y, C=1e-6, gamma=0.2)
    f = model.decision_function(X)
    assert np.ptp(f) < 1e-4
    assert np.mean(model.predict(X) == y) <= max(np.mean(y), 1 - np.mean(y)) + 0.05
    ref = SVC(C=1e-6, gamma=0.2).fit(X, y)
    assert np.array_equal(model.predict(X), ref.predict(X))


@pytest.mark.parametrize("seed", range(3))
def test_svm_box_kkt_and_sklearn(seed):
    X, y = noisy(80, 4, seed)
    X = (X - X.mean(0)) / X.std(0)
    C, gamma = 3.0, 0.2
    model = train_svm_rbf(X, y, C=C, gamma=gamma)
    assert np.all((model.alphas > 0) & (model.alphas <= C + 1e-12))
    # KKT: free support vectors sit on the margin
    ys = 2 * y - 1
    margin = ys * model.decision_function(X)
    sv_rows = [int(np.flatnonzero((X == s).all(axis=1))[0]) for s in model.support_vectors]
    free = [r for r, a in zip(sv_rows, model.alphas) if a < C - 1e-8]
    assert np.all(np.abs(margin[free] - 1.0) < 1e-2)
    non_sv = np.setdiff1d(np.arange(len(y)), sv_rows)
    assert np.all(margin[non_sv] >= 1.0 - 1e-2)
    ref = SVC(C=C, gamma=gamma, kernel="rbf", tol=1e-6).fit(X, y)
    np.testing.assert_allclose(model.decision_function(X), ref.decision_function(X), atol=1e-2)


def test_svm_rejects_unnormalised_and_round_trips():
    X, y = noisy()
    with pytest.raises(UnnormalizedDataError):
        train_svm_rbf(X * 100.0, y)
    X = (X - X.mean(0)) / X.std(0)
    model = train_svm_rbf(X, y)
    clone = svm_from_json(svm_to_json(model))
    np.testing.assert_array_equal(clone.decision_function(X), model.decision_function(X))


# --------------------------------------------------------------------- evaluation

def test_svm_pipeline_scales_with_training_rows_only():
    X, y = noisy()
    X = X * 50.0 + 7.0
    train = np.arange(len(y)) < 100
    pipe = fit_pipeline("svm", X[train], y[train])
    np.testing.assert_allclose(pipe.mean, X[train].mean(axis=0))
    np.testing.assert_allclose(pipe.scale, X[train].std(axis=0))
    test = X[~train]
    before = pipe.predict(test)
    # rescaling the other test rows must not change any single row's prediction
    for r in range(len(test)):
        shifted = test * 1000.0
        shifted[r] = test[r]
        assert pipe.predict(shifted)[r] == before[r]
    refit = fit_pipeline("svm", X[train], y[train])
    assert np.array_equal(refit.predict(test), before)


def test_cross_validate_report():
    X, y = noisy()
    cv = cross_validate(Dataset(X, y), "rf", seed=0, n_trees=20)
    assert cv.confusion.sum() == len(y)
    assert cv.pooled_accuracy == pytest.approx(np.mean(cv.predictions == y))
    assert np.all((cv.fold_accuracy >= 0) & (cv.fold_accuracy <= 1))
    again = cross_validate(Dataset(X, y), "rf", seed=0, n_trees=20)
    assert np.array_equal(again.predictions, cv.predictions)


def test_single_hour_report():
    X, y = noisy()
    rows = accuracy_over_time(lambda h, kind, feats: Dataset(X, y), hours=[1], n_trees=10)
    assert {r.hour for r in rows} == {1}
    assert [r.fold for r in rows] == [str(k) for k in range(10)] + ["mean", "std", "pooled"]


def _oracle_data(n=200, seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = np.column_stack([y + 0.0, rng.normal(size=n), rng.normal(size=n), rng.normal(size=n)])
    return Dataset(X, y, [f"E{i}" for i in range(n)], ["Label@t0", "Noise@t0", "Noise@t1", "Other@t0"])


def test_importance_oracle_and_noise():
    data = _oracle_data()
    ranking = cv_permutation_importance(data, "rf", seed=0, n_trees=50)
    assert ranking[0][0] == "Label" and ranking[0][1] >= 0.3
    assert abs(dict(ranking)["Noise"]) <= 0.02


def test_importance_deterministic_and_sorted():
    data = _oracle_data(100)
    model = train_random_forest(data.X, data.y, n_trees=30, seed=1)
    a = permutation_importance(model, data, 3, seed=7)
    assert a == permutation_importance(model, data, 3, seed=7)
    assert [v for _, v in a] == sorted((v for _, v in a), reverse=True)
    assert best_set({1: a, 6: a}, k=2) == [a[0][0], a[1][0]]
