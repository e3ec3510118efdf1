import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_split
from solarcast.models.forest import fit_forest
from solarcast.models.tree import DecisionTree, fit_tree


def test_split_matches_brute_force():
    rng = np.random.default_rng(7)
    for i in range(50):
        n = int(rng.integers(2, 51))
        d = int(rng.integers(1, 5))
        X = rng.normal(size=(n, d))
        if i % 3 == 0:
            X = np.round(X * 2)  # repeated values
        y = rng.normal(size=n) + 2 * (X[:, 0] > 0)
        min_leaf = int(rng.integers(1, 4))
        gain, j, thr = brute_force_split(X, y, min_leaf)
        t = fit_tree(X, y, max_depth=1, min_samples_leaf=min_leaf)
        if j is None:
            assert t.n_nodes == 1
            continue
        assert t.feature[0] == j, i
        assert t.threshold[0] == pytest.approx(thr, abs=1e-12), i
        left = X[:, j] <= thr
        assert t.value[t.left[0]] == pytest.approx(y[left].mean())
        assert t.value[t.right[0]] == pytest.approx(y[~left].mean())


def test_examples():
    t = fit_tree(np.arange(4.0).reshape(-1, 1), [0, 0, 10, 10], max_depth=1)
    assert 1 < t.threshold[0] < 2
    assert sorted(t.value[[t.left[0], t.right[0]]]) == [0, 10]
    t = fit_tree(np.random.default_rng(0).normal(size=(20, 3)), np.full(20, 4.2))
    assert t.n_nodes == 1 and t.value[0] == pytest.approx(4.2)
    y = np.random.default_rng(1).normal(size=30)
    t = fit_tree(np.random.default_rng(2).normal(size=(30, 2)), y, max_depth=0)
    assert t.n_nodes == 1 and t.value[0] == pytest.approx(y.mean())


def test_tie_breaks_lowest_feature_then_threshold():
    # both features carry the same partition; feature 0 must win
    X = np.array([[0, 0], [1, 1], [2, 2], [3, 3]], dtype=float)
    t = fit_tree(X, [0, 0, 1, 1], max_depth=1)
    assert t.feature[0] == 0
    # two equally good thresholds on one feature: the lower wins
    X = np.array([[0.0], [1.0], [2.0]])
    t = fit_tree(X, [0.0, 1.0, 0.0], max_depth=1)
    assert t.threshold[0] == 0.5


def test_weights_act_like_repeated_rows():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(25, 2))
    y = rng.normal(size=25)
    w = rng.integers(0, 4, 25).astype(float)
    a = fit_tree(X, y, weights=w, max_depth=3)
    rep = np.repeat(np.arange(25), w.astype(int))
    b = fit_tree(X[rep], y[rep], max_depth=3)
    grid = rng.normal(size=(200, 2))
    assert np.allclose(a.predict(grid), b.predict(grid))


def test_min_samples_leaf_and_depth_respected():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(300, 4))
    y = X[:, 0] * 3 + rng.normal(size=300)
    t = fit_tree(X, y, max_depth=4, min_samples_leaf=15)
    assert t.depth() <= 4
    assert np.bincount(t.apply(X)).max() >= 15
    counts = np.bincount(t.apply(X), minlength=t.n_nodes)
    assert counts[t.feature < 0].min() >= 15


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_monotone_feature_maps_keep_structure(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(60, 3))
    y = np.sin(X[:, 0]) + X[:, 1] ** 2 + 0.1 * rng.normal(size=60)
    Z = np.column_stack([np.exp(X[:, 0]), X[:, 1] ** 3 + 2 * X[:, 1], np.arctan(X[:, 2])])
    a = fit_tree(X, y, max_depth=4, min_samples_leaf=2)
    b = fit_tree(Z, y, max_depth=4, min_samples_leaf=2)
    assert np.array_equal(a.feature, b.feature)
    assert np.array_equal(a.apply(X), b.apply(Z))


def test_tree_serialization():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(100, 3))
    t = fit_tree(X, rng.normal(size=100), max_depth=5)
    back = DecisionTree.from_dict(t.to_dict())
    assert back.predict(X).tobytes() == t.predict(X).tobytes()


def test_forest_is_mean_of_trees():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(120, 5))
    y = X @ rng.normal(size=5) + rng.normal(size=120)
    f = fit_forest(X, y, n_estimators=7, max_depth=6, seed=3)
    Q = rng.normal(size=(50, 5))
    manual = sum(t.predict(Q) for t in f.trees) / 7
    assert np.array_equal(f.predict(Q), np.mean(np.stack([t.predict(Q) for t in f.trees]), axis=0))
    assert np.allclose(f.predict(Q), manual, rtol=0, atol=1e-12)


def test_single_full_tree_forest_equals_tree():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(80, 3))
    y = rng.normal(size=80)
    f = fit_forest(X, y, n_estimators=1, max_depth=None, feature_fraction=1.0, bootstrap=False)
    t = fit_tree(X, y)
    Q = rng.normal(size=(40, 3))
    assert np.array_equal(f.predict(Q), t.predict(Q))


def test_forest_determinism_and_variance_reduction():
    rng = np.random.default_rng(9)
    X = rng.uniform(-2, 2, size=(400, 4))
    y = X @ np.array([1.0, -2.0, 0.5, 0.0]) + rng.normal(0, 1.0, 400)
    Xt = rng.uniform(-2, 2, size=(400, 4))
    yt = Xt @ np.array([1.0, -2.0, 0.5, 0.0])
    a = fit_forest(X, y, n_estimators=500, max_depth=None, seed=1)
    b = fit_forest(X, y, n_estimators=500, max_depth=None, seed=1)
    assert np.array_equal(a.predict(Xt), b.predict(Xt))
    single = fit_tree(X, y)
    assert np.mean((a.predict(Xt) - yt) ** 2) <= np.mean((single.predict(Xt) - yt) ** 2)
