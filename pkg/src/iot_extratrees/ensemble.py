"""Bagged tree ensemble with hard majority voting."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .preprocess import PreprocessModel, train_test_split
from .tree import DecisionTree, TreeParams, build_tree

log = logging.getLogger(__name__)

THREADS_ENV = "IOT_EXTRATREES_THREADS"


@dataclass(frozen=True)
class EnsembleParams:
    n_trees: int = 100
    tree_params: TreeParams = field(default_factory=TreeParams)
    bootstrap: bool = True
    seed: int = 42

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def describe(self) -> dict:
        tp = self.tree_params
        return {
            "n_trees": self.n_trees,
            "k_features": tp.k_features,
            "max_depth": tp.max_depth,
            "min_samples_split": tp.min_samples_split,
            "min_samples_leaf": tp.min_samples_leaf,
            "splitter": tp.splitter,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
        }


def derive_seed(seed: int, *key: int) -> int:
    """Per-tree seed from ``(seed, i)``.

    Uses numpy's ``SeedSequence`` hash with ``key`` as the spawn key, so the
    value depends only on the inputs and never on build order.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def bootstrap_indices(n_train: int, rng_seed: int) -> np.ndarray:
    """``n_train`` draws with replacement from ``range(n_train)``."""
    if n_train < 1:
        raise ValueError("bootstrap needs at least one training row")
    return np.random.default_rng(rng_seed).integers(0, n_train, size=n_train)


def resolve_threads(n_jobs: Optional[int]) -> int:
    if n_jobs is None:
        n_jobs = int(os.environ.get(THREADS_ENV, "1"))
    if n_jobs < 0:
        n_jobs = os.cpu_count() or 1
    return max(1, n_jobs)


def _fit_one(X, y, i, params: EnsembleParams, n_classes: int) -> DecisionTree:
    if params.bootstrap:
        samples = bootstrap_indices(len(y), derive_seed(params.seed, i, 1))
    else:
        samples = np.arange(len(y))
    return build_tree(samples, X, y, params.tree_params, derive_seed(params.seed, i, 0), n_classes)


@dataclass(frozen=True, eq=False)
class ExtraTreesModel:
    trees: tuple[DecisionTree, ...]
    classes: tuple[str, ...]
    feature_names: tuple[str, ...]
    params: EnsembleParams
    preprocess: Optional[PreprocessModel] = None

    def __post_init__(self):
        if len(self.trees) != self.params.n_trees:
            raise ValueError("tree count does not match params.n_trees")
        widths = {t.n_features for t in self.trees}
        if widths != {len(self.feature_names)}:
            raise ValueError("trees disagree with feature list width")

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.feature_names):
            raise ValueError(
                f"expected {len(self.feature_names)} features per row, got {X.shape[1]}"
            )
        return X

    def tree_votes(self, X) -> np.ndarray:
        """``(n_trees, rows)`` matrix of per-tree class ids."""
        X = self._check(X)
        return np.stack([t.predict(X) for t in self.trees])

    def vote_counts(self, X) -> np.ndarray:
        votes = self.tree_votes(X)
        counts = np.zeros((votes.shape[1], self.n_classes), dtype=np.int64)
        for c in range(self.n_classes):
            counts[:, c] = np.count_nonzero(votes == c, axis=0)
        return counts

    def vote_shares(self, X) -> np.ndarray:
        """Fraction of trees voting for each class, one row per input row."""
        return self.vote_counts(X) / len(self.trees)

    def predict(self, X) -> np.ndarray:
        """Majority vote; ties go to the lowest class id."""
        return np.argmax(self.vote_counts(X), axis=1)


def fit(
    X,
    y,
    params: EnsembleParams = EnsembleParams(),
    *,
    classes: Optional[Sequence[str]] = None,
    feature_names: Optional[Sequence[str]] = None,
    preprocess: Optional[PreprocessModel] = None,
    n_jobs: Optional[int] = None,
) -> ExtraTreesModel:
    """Train ``params.n_trees`` trees, each on its own bootstrap draw.

    Tree ``i`` depends only on ``(X, y, params, i)``, so the fitted model is
    the same for any ``n_jobs``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError(f"training data must be a non-empty 2-D array, got shape {X.shape}")
    if len(y) != X.shape[0]:
        raise ValueError(f"{len(y)} labels for {X.shape[0]} rows")
    if not np.all(np.isfinite(X)):
        raise ValueError("training data contains non-finite values")
    if classes is None:
        classes = [str(c) for c in range(int(y.max()) + 1)]
    n_classes = len(classes)
    if y.min() < 0 or y.max() >= n_classes:
        raise ValueError(f"class ids must lie in [0, {n_classes})")
    if feature_names is None:
        feature_names = [f"f{j}" for j in range(X.shape[1])]
    if len(feature_names) != X.shape[1]:
        raise ValueError("feature_names length does not match data width")

    tree_params = replace(params.tree_params, k_features=params.tree_params.resolve_k(X.shape[1]))
    params = replace(params, tree_params=tree_params)

    workers = min(resolve_threads(n_jobs), params.n_trees)
    log.info("fitting %d trees on %d rows x %d features (%d workers)",
             params.n_trees, X.shape[0], X.shape[1], workers)
    if workers == 1:
        trees = [_fit_one(X, y, i, params, n_classes) for i in range(params.n_trees)]
    else:
        trees = Parallel(n_jobs=workers)(
            delayed(_fit_one)(X, y, i, params, n_classes) for i in range(params.n_trees)
        )
    return ExtraTreesModel(tuple(trees), tuple(classes), tuple(feature_names), params, preprocess)


def predict(model: ExtraTreesModel, row) -> int:
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1:
        raise ValueError("predict takes a single row; use model.predict for batches")
    return int(model.predict(row)[0])


def vote_shares(model: ExtraTreesModel, row) -> np.ndarray:
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1:
        raise ValueError("vote_shares takes a single row; use model.vote_shares for batches")
    return model.vote_shares(row)[0]


def default_grid(n_features: int, seed: int = 42) -> list[EnsembleParams]:
    """The package's own search space: trees x depth cap x features per node."""
    k_sqrt = TreeParams().resolve_k(n_features)
    ks = sorted({k_sqrt, n_features})
    return [
        EnsembleParams(n, TreeParams(k_features=k, max_depth=d), True, seed)
        for n in (50, 100, 200)
        for d in (None, 20)
        for k in ks
    ]


def grid_search(
    X,
    y,
    grid: Sequence[EnsembleParams],
    validation_fraction: float = 0.2,
    seed: int = 42,
    *,
    n_classes: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> tuple[EnsembleParams, list[dict]]:
    """Pick the candidate with the highest hold-out accuracy (first wins ties)."""
    if not grid:
        raise ValueError("parameter grid is empty")
    if not 0.0 < validation_fraction < 1.0:
        raise ValueError("validation_fraction must be in (0, 1)")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    split = train_test_split(len(y), 1.0 - validation_fraction, seed)
    fit_idx, val_idx = split.train_indices, split.test_indices
    if fit_idx.size == 0 or val_idx.size == 0:
        raise ValueError("validation split leaves an empty side")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    classes = [str(c) for c in range(n_classes)]

    results = []
    best, best_acc = None, -1.0
    for i, params in enumerate(grid):
        model = fit(X[fit_idx], y[fit_idx], params, classes=classes, n_jobs=n_jobs)
        acc = float(np.mean(model.predict(X[val_idx]) == y[val_idx]))
        results.append({"candidate": i, **params.describe(), "validation_accuracy": acc})
        log.info("candidate %d: %s -> %.6f", i, params.describe(), acc)
        if acc > best_acc:
            best, best_acc = params, acc
    return best, results
