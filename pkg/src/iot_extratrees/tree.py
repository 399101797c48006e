"""Single decision-tree induction with Gini impurity and per-node feature sampling.

Trees are stored as flat preorder arrays. Node ``i`` is a leaf when
``feature[i] == -1``; otherwise rows with ``x[feature[i]] <= threshold[i]``
go to ``left[i]`` and the rest to ``right[i]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np

SPLITTERS = ("best", "random")


@dataclass(frozen=True)
class TreeParams:
    k_features: Optional[int] = None  # None -> ceil(sqrt(m)) at fit time
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    splitter: str = "best"
    impurity: str = "gini"

    def __post_init__(self):
        if self.k_features is not None and self.k_features < 1:
            raise ValueError("k_features must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.splitter not in SPLITTERS:
            raise ValueError(f"splitter must be one of {SPLITTERS}")
        if self.impurity != "gini":
            raise ValueError("only gini impurity is supported")

    def resolve_k(self, n_features: int) -> int:
        k = math.ceil(math.sqrt(n_features)) if self.k_features is None else self.k_features
        if not 1 <= k <= n_features:
            raise ValueError(f"k_features={k} outside [1, {n_features}]")
        return k


class SplitCandidate(NamedTuple):
    feature: int
    threshold: float
    impurity: float
    left_count: int
    right_count: int


def gini(class_counts) -> float:
    """``1 - sum(p_c ** 2)`` for the class proportions of one node."""
    total = 0
    for c in class_counts:
        total += c
    if total <= 0:
        raise ValueError("gini impurity of an empty node is undefined")
    acc = 0.0
    for c in class_counts:
        p = c / total
        acc = acc + p * p
    return 1.0 - acc


def split_impurity(left_counts, right_counts) -> float:
    """Child impurities weighted by the fraction of samples on each side."""
    n_left = sum(left_counts)
    n_right = sum(right_counts)
    if n_left <= 0 or n_right <= 0:
        raise ValueError("both sides of a split must be non-empty")
    n = n_left + n_right
    return (n_left / n) * gini(left_counts) + (n_right / n) * gini(right_counts)


def midpoint(lo: float, hi: float) -> float:
    """Threshold strictly separating ``lo < hi`` under the ``<=`` rule."""
    mid = (lo + hi) / 2.0
    if not math.isfinite(mid):
        mid = lo / 2.0 + hi / 2.0
    if mid >= hi:
        mid = lo
    return mid


def _best_splits(x: np.ndarray, y: np.ndarray, n_classes: int):
    """Scan every midpoint of every column of ``x`` (samples x features) at once.

    Returns per-column ``(impurity, position)`` of the first minimum, with
    ``inf`` impurity for constant columns, plus the sorted values.
    """
    n, k = x.shape
    order = np.argsort(x, axis=0, kind="stable")
    xs = np.take_along_axis(x, order, axis=0)
    ys = y[order]
    valid = xs[:-1] < xs[1:]
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    acc_l = np.zeros((n - 1, k))
    acc_r = np.zeros((n - 1, k))
    for c in range(n_classes):
        hits = np.cumsum(ys == c, axis=0)
        left = hits[:-1]
        right = hits[-1] - left
        p = left / n_left
        acc_l = acc_l + p * p
        p = right / n_right
        acc_r = acc_r + p * p
    imp = (n_left / n) * (1.0 - acc_l) + (n_right / n) * (1.0 - acc_r)
    imp[~valid] = np.inf
    pos = np.argmin(imp, axis=0)
    return imp[pos, np.arange(k)], pos, xs


def _random_threshold(x: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator):
    lo, hi = float(x.min()), float(x.max())
    if not lo < hi:
        return None
    thr = float(rng.uniform(lo, hi))
    if thr >= hi:
        thr = lo
    go_left = x <= thr
    left = np.bincount(y[go_left], minlength=n_classes)
    right = np.bincount(y[~go_left], minlength=n_classes)
    n_left, n_right = int(left.sum()), int(right.sum())
    imp = split_impurity(left.tolist(), right.tolist())
    return imp, thr, n_left, n_right


def find_best_split(
    samples,
    features,
    data: np.ndarray,
    labels: np.ndarray,
    n_classes: Optional[int] = None,
    *,
    splitter: str = "best",
    rng: Optional[np.random.Generator] = None,
) -> Optional[SplitCandidate]:
    """Lowest-impurity split of ``samples`` over the candidate ``features``.

    The ``"best"`` splitter scans every midpoint between consecutive distinct
    values. Ties go to the lower feature index, then the lower threshold.
    The ``"random"`` splitter draws one uniform threshold per feature.
    Returns ``None`` when no feature takes two distinct values.
    """
    samples = np.asarray(samples, dtype=np.intp)
    labels = np.asarray(labels)
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    y = labels[samples]
    features = np.array(sorted(int(f) for f in features), dtype=np.intp)
    if samples.size < 2 or features.size == 0:
        return None
    if splitter == "best":
        imp, pos, xs = _best_splits(data[np.ix_(samples, features)], y, n_classes)
        j = int(np.argmin(imp))  # first minimum: lowest feature index wins ties
        if not np.isfinite(imp[j]):
            return None
        p = int(pos[j])
        thr = midpoint(float(xs[p, j]), float(xs[p + 1, j]))
        return SplitCandidate(int(features[j]), thr, float(imp[j]), p + 1, samples.size - p - 1)

    if rng is None:
        raise ValueError("random splitter needs an rng")
    best: Optional[SplitCandidate] = None
    for f in features:
        found = _random_threshold(data[samples, f], y, n_classes, rng)
        if found is None:
            continue
        imp, thr, n_left, n_right = found
        if best is None or imp < best.impurity:
            best = SplitCandidate(int(f), thr, imp, n_left, n_right)
    return best


@dataclass(frozen=True)
class Leaf:
    class_counts: tuple
    predicted_class: int


@dataclass(frozen=True)
class Internal:
    feature: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Internal]


@dataclass(frozen=True, eq=False)
class DecisionTree:
    feature: np.ndarray  # int32, -1 for leaves
    threshold: np.ndarray  # float64
    left: np.ndarray  # int32, -1 for leaves
    right: np.ndarray  # int32, -1 for leaves
    class_counts: np.ndarray  # (n_nodes, n_classes) int64
    n_features: int
    params: TreeParams = field(default_factory=TreeParams)
    seed: int = 0
    prediction: np.ndarray = field(init=False, repr=False)
    depth: int = field(init=False)

    def __post_init__(self):
        # argmax returns the first maximum: ties go to the lowest class id.
        object.__setattr__(self, "prediction", np.argmax(self.class_counts, axis=1).astype(np.intp))
        depths = np.zeros(len(self.feature), dtype=np.intp)
        for i in range(len(self.feature)):
            if self.feature[i] >= 0:
                depths[self.left[i]] = depths[self.right[i]] = depths[i] + 1
        object.__setattr__(self, "depth", int(depths.max()) if len(depths) else 0)
        for arr in (self.feature, self.threshold, self.left, self.right, self.class_counts):
            arr.flags.writeable = False

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_classes(self) -> int:
        return self.class_counts.shape[1]

    @property
    def leaf_count(self) -> int:
        return int(np.count_nonzero(self.feature < 0))

    @property
    def root(self) -> TreeNode:
        return self._node(0)

    def _node(self, i: int) -> TreeNode:
        if self.feature[i] < 0:
            return Leaf(tuple(int(c) for c in self.class_counts[i]), int(self.prediction[i]))
        return Internal(
            int(self.feature[i]),
            float(self.threshold[i]),
            self._node(int(self.left[i])),
            self._node(int(self.right[i])),
        )

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of ``X``."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected rows of width {self.n_features}, got shape {X.shape}")
        idx = np.zeros(len(X), dtype=np.intp)
        active = np.flatnonzero(self.feature[idx] >= 0)
        while active.size:
            node = idx[active]
            go_left = X[active, self.feature[node]] <= self.threshold[node]
            idx[active] = np.where(go_left, self.left[node], self.right[node])
            active = active[self.feature[idx[active]] >= 0]
        return idx

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.prediction[self.apply(X)]


def build_tree(
    samples,
    data: np.ndarray,
    labels: np.ndarray,
    params: TreeParams = TreeParams(),
    rng_seed: int = 0,
    n_classes: Optional[int] = None,
) -> DecisionTree:
    """Grow one tree over ``samples`` (repeats allowed, as in a bootstrap draw).

    A node becomes a leaf when it is pure, has fewer than
    ``min_samples_split`` samples, sits at ``max_depth``, has no valid split
    among its sampled features, or its best split leaves a side with fewer
    than ``min_samples_leaf`` samples.
    """
    samples = np.asarray(samples, dtype=np.intp)
    if samples.size == 0:
        raise ValueError("cannot build a tree from an empty sample set")
    data = np.asarray(data, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.intp)
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    m = data.shape[1]
    k = params.resolve_k(m)
    rng = np.random.default_rng(rng_seed)

    feature, threshold, left, right, counts = [], [], [], [], []
    stack = [(samples, 0, -1, False)]
    while stack:
        node_samples, depth, parent, is_right = stack.pop()
        node_id = len(feature)
        if parent >= 0:
            (right if is_right else left)[parent] = node_id
        node_counts = np.bincount(labels[node_samples], minlength=n_classes)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(node_counts)

        if (
            np.count_nonzero(node_counts) <= 1
            or node_samples.size < params.min_samples_split
            or (params.max_depth is not None and depth >= params.max_depth)
        ):
            continue
        chosen = np.sort(rng.choice(m, size=k, replace=False))
        split = find_best_split(
            node_samples, chosen, data, labels, n_classes, splitter=params.splitter, rng=rng
        )
        if split is None or min(split.left_count, split.right_count) < params.min_samples_leaf:
            continue

        feature[node_id] = split.feature
        threshold[node_id] = split.threshold
        go_left = data[node_samples, split.feature] <= split.threshold
        stack.append((node_samples[~go_left], depth + 1, node_id, True))
        stack.append((node_samples[go_left], depth + 1, node_id, False))

    return DecisionTree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        class_counts=np.asarray(counts, dtype=np.int64).reshape(len(feature), n_classes),
        n_features=m,
        params=params,
        seed=int(rng_seed),
    )


def tree_predict(tree: DecisionTree, row) -> int:
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1 or row.shape[0] != tree.n_features:
        raise ValueError(f"row width {row.shape} does not match {tree.n_features} features")
    return int(tree.predict(row[None, :])[0])
