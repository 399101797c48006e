import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iot_extratrees.tree import (
    Internal,
    Leaf,
    TreeParams,
    build_tree,
    find_best_split,
    gini,
    midpoint,
    split_impurity,
    tree_predict,
)

import oracles

XOR_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_Y = np.array([0, 1, 1, 0])
FULL = TreeParams(k_features=2)


@pytest.mark.parametrize("counts, expected", [([2, 2], 0.5), ([3, 0], 0.0), ([3, 1], 0.375)])
def test_gini(counts, expected):
    assert gini(counts) == pytest.approx(expected, abs=1e-15)


def test_gini_empty():
    with pytest.raises(ValueError):
        gini([0, 0])


@pytest.mark.parametrize(
    "left, right, expected",
    [([2, 0], [0, 2], 0.0), ([1, 1], [1, 1], 0.5), ([1, 0], [1, 2], 1 / 3)],
)
def test_split_impurity(left, right, expected):
    assert split_impurity(left, right) == pytest.approx(expected, abs=1e-15)


def test_split_impurity_empty_side():
    with pytest.raises(ValueError):
        split_impurity([0, 0], [1, 1])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=1, max_size=8).filter(lambda c: sum(c) > 0))
def test_gini_bounds(counts):
    g = gini(counts)
    assert 0.0 <= g <= 1 - 1 / len(counts) + 1e-12
    assert (g == 0.0) == (sum(1 for c in counts if c) == 1)


def test_best_split_simple():
    X = np.array([[1.0], [2.0], [3.0], [4.0]])
    s = find_best_split([0, 1, 2, 3], [0], X, np.array([0, 0, 1, 1]))
    assert s.threshold == 2.5 and s.impurity == 0.0
    assert (s.left_count, s.right_count) == (2, 2)


def test_best_split_constant_feature():
    X = np.ones((4, 1))
    assert find_best_split([0, 1, 2, 3], [0], X, np.array([0, 1, 0, 1])) is None


def test_best_split_pure_node():
    X = np.array([[1.0], [2.0]])
    s = find_best_split([0, 1], [0], X, np.array([0, 0]))
    assert s.impurity == 0.0 and s.threshold == 1.5


def test_best_split_tie_prefers_lower_feature():
    s = find_best_split(range(4), [1, 0], XOR_X, XOR_Y)
    assert (s.feature, s.threshold, s.impurity) == (0, 0.5, 0.5)


def test_best_split_tie_prefers_lower_threshold():
    X = np.array([[1.0], [2.0], [3.0]])
    # labels 0,1,0: thresholds 1.5 and 2.5 both give 1/3
    s = find_best_split(range(3), [0], X, np.array([0, 1, 0]))
    assert s.threshold == 1.5


def test_midpoint_adjacent_floats():
    a = 1.0
    b = np.nextafter(a, 2.0)
    assert a <= midpoint(a, b) < b


@settings(max_examples=150, deadline=None)
@given(
    st.integers(2, 50),
    st.integers(1, 5),
    st.integers(2, 4),
    st.integers(0, 2**31),
)
def test_best_split_is_argmin(n, m, n_classes, seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 6, size=(n, m)).astype(float)
    y = rng.integers(0, n_classes, size=n)
    rows = rng.integers(0, n, size=n)  # duplicates allowed, as in a bootstrap
    got = find_best_split(rows, range(m), X, y, n_classes)
    want = oracles.best_split(rows.tolist(), X.tolist(), y.tolist(), n_classes)
    if want is None:
        assert got is None
    else:
        assert (got.impurity, got.feature, got.threshold, got.left_count, got.right_count) == want


def test_leaf_when_pure():
    t = build_tree([0, 1, 2], np.array([[1.0], [2.0], [3.0]]), np.array([1, 1, 1]), TreeParams(1))
    assert t.n_nodes == 1 and t.depth == 0 and isinstance(t.root, Leaf)
    assert t.root.predicted_class == 1


def test_xor():
    t = build_tree(range(4), XOR_X, XOR_Y, FULL, 0)
    assert t.depth == 2 and t.leaf_count == 4
    assert t.predict(XOR_X).tolist() == XOR_Y.tolist()
    assert all(tree_predict(t, r) == y for r, y in zip(XOR_X, XOR_Y))
    root = t.root
    assert isinstance(root, Internal) and (root.feature, root.threshold) == (0, 0.5)


def test_max_depth_zero_majority():
    y = np.array([2, 1, 1, 2, 2])
    t = build_tree(range(5), np.arange(5.0)[:, None], y, TreeParams(1, max_depth=0), n_classes=3)
    assert t.n_nodes == 1 and t.root.predicted_class == 2
    assert t.root.class_counts == (0, 2, 3)


def test_majority_tie_lowest_class():
    t = build_tree(range(2), np.ones((2, 1)), np.array([1, 0]), TreeParams(1))
    assert t.root.predicted_class == 0


def test_min_samples_leaf_stops():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([1, 0, 0, 0])
    assert build_tree(range(4), X, y, TreeParams(1, min_samples_leaf=2)).n_nodes == 1
    assert build_tree(range(4), X, y, TreeParams(1)).n_nodes == 3


def test_min_samples_split_stops():
    t = build_tree(range(4), XOR_X, XOR_Y, TreeParams(2, min_samples_split=5))
    assert t.n_nodes == 1


def test_empty_samples():
    with pytest.raises(ValueError):
        build_tree([], XOR_X, XOR_Y, FULL)


def test_single_leaf_predicts_constant():
    t = build_tree([0], np.zeros((1, 3)), np.array([3]), TreeParams(1))
    rng = np.random.default_rng(0)
    assert all(tree_predict(t, r) == 3 for r in rng.normal(size=(10, 3)))


def test_boundary_goes_left():
    X = np.array([[2.0], [3.0]])
    t = build_tree(range(2), X, np.array([0, 1]), TreeParams(1))
    assert t.threshold[0] == 2.5
    assert tree_predict(t, [2.5]) == 0
    assert tree_predict(t, [2.5000001]) == 1


def test_predict_width_mismatch():
    t = build_tree(range(4), XOR_X, XOR_Y, FULL)
    with pytest.raises(ValueError):
        tree_predict(t, [1.0])


def test_params_validation():
    for bad in (dict(k_features=0), dict(min_samples_split=1), dict(min_samples_leaf=0),
                dict(max_depth=-1), dict(splitter="odd"), dict(impurity="entropy")):
        with pytest.raises(ValueError):
            TreeParams(**bad)
    with pytest.raises(ValueError):
        TreeParams(k_features=5).resolve_k(3)
    assert TreeParams().resolve_k(8) == 3 and TreeParams().resolve_k(9) == 3


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_full_growth_fits_consistent_training_set(seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 4, size=(100, 3)).astype(float)
    # label is a function of the row, so identical rows never disagree
    y = (X @ np.array([1, 3, 5]).astype(int)) % 3
    t = build_tree(range(100), X, y, TreeParams(3), seed)
    assert np.array_equal(t.predict(X), y)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 4))
def test_build_deterministic(seed, k):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(60, 4))
    y = rng.integers(0, 3, 60)
    a = build_tree(range(60), X, y, TreeParams(k), 7)
    b = build_tree(range(60), X, y, TreeParams(k), 7)
    for name in ("feature", "threshold", "left", "right", "class_counts"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_depth_cap_respected():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(200, 3))
    y = rng.integers(0, 2, 200)
    t = build_tree(range(200), X, y, TreeParams(3, max_depth=4), 0)
    assert t.depth <= 4


def test_left_right_consistency():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(150, 3))
    y = rng.integers(0, 3, 150)
    t = build_tree(range(150), X, y, TreeParams(2), 5)
    leaves = t.apply(X)
    # every training row must satisfy every test on its path
    for i, leaf in enumerate(leaves):
        node = 0
        while t.feature[node] >= 0:
            node = t.left[node] if X[i, t.feature[node]] <= t.threshold[node] else t.right[node]
        assert node == leaf


def test_random_splitter_builds_valid_tree():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(120, 4))
    y = (X[:, 0] > 0).astype(int)
    t = build_tree(range(120), X, y, TreeParams(4, splitter="random"), 11)
    assert np.array_equal(t.predict(X), y)
    t2 = build_tree(range(120), X, y, TreeParams(4, splitter="random"), 11)
    assert np.array_equal(t.threshold, t2.threshold)


def test_matches_recursive_oracle():
    rng = np.random.default_rng(4)
    X = rng.integers(0, 5, size=(80, 3)).astype(float)
    y = rng.integers(0, 3, 80)
    t = build_tree(range(80), X, y, TreeParams(3), 0)
    ref = oracles.grow(list(range(80)), X.tolist(), y.tolist(), 3)
    assert t.depth == oracles.depth(ref)
    probe = rng.integers(-1, 6, size=(300, 3)).astype(float) + rng.uniform(-0.5, 0.5, (300, 3))
    assert t.predict(probe).tolist() == [oracles.predict(ref, r) for r in probe.tolist()]
