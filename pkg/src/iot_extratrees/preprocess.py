"""Cleaning, standardization, categorical encoding and train/test splitting."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data_ingest import CATEGORICAL, NUMERIC, DataError, RawTable

log = logging.getLogger(__name__)


class UnseenCategoryError(DataError):
    def __init__(self, column: str, value: str):
        super().__init__(f"unseen category in column {column!r}: {value!r}")
        self.column = column
        self.value = value


@dataclass(frozen=True)
class CleanReport:
    input_rows: int
    duplicates_removed: int
    nonfinite_cells_marked: int
    rows_dropped_missing: int
    rows_remaining: int

    def as_dict(self) -> dict:
        return {
            "input_rows": self.input_rows,
            "duplicates_removed": self.duplicates_removed,
            "nonfinite_cells_marked": self.nonfinite_cells_marked,
            "rows_dropped_missing": self.rows_dropped_missing,
            "rows_remaining": self.rows_remaining,
        }


def _row_keys(table: RawTable) -> np.ndarray:
    """Integer code matrix such that equal rows have equal code rows."""
    keys = np.empty((table.row_count, len(table.schema)), dtype=np.int64)
    for j, col in enumerate(table.schema):
        values, mask = table.columns[j], table.missing[j]
        if col.kind == NUMERIC:
            _, codes = np.unique(values, return_inverse=True, equal_nan=True)
            codes = codes + 1
        else:
            _, codes = np.unique(values.astype(str), return_inverse=True)
            codes = codes + 1
        keys[:, j] = np.where(mask, 0, codes.reshape(-1))
    return keys


def clean(table: RawTable) -> tuple[RawTable, CleanReport]:
    """Deduplicate, mark non-finite numerics as missing, then drop incomplete rows.

    Duplicate detection compares every cell (missing cells compare equal to
    each other only) and keeps the first occurrence.
    """
    n_in = table.row_count
    if n_in and table.schema:
        _, first = np.unique(_row_keys(table), axis=0, return_index=True)
        keep = np.sort(first)
    else:
        keep = np.arange(n_in)
    deduped = table.take(keep) if len(keep) != n_in else table
    duplicates = n_in - deduped.row_count

    marked = 0
    updates = {}
    for col in deduped.schema:
        if col.kind != NUMERIC:
            continue
        values, mask = deduped.columns[col.index], deduped.missing[col.index]
        bad = ~np.isfinite(values) & ~mask
        n_bad = int(bad.sum())
        if n_bad:
            marked += n_bad
            values = values.copy()
            values[bad] = np.nan
            updates[col.name] = (NUMERIC, values, mask | bad)
    if updates:
        deduped = deduped.replace_columns(updates)

    any_missing = np.zeros(deduped.row_count, dtype=bool)
    for mask in deduped.missing:
        any_missing |= mask
    dropped = int(any_missing.sum())
    out = deduped.take(np.flatnonzero(~any_missing)) if dropped else deduped

    report = CleanReport(n_in, duplicates, marked, dropped, out.row_count)
    return out, report


@dataclass(frozen=True)
class Standardizer:
    """Per-column mean and population standard deviation."""

    columns: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    fitted_on_rows: int

    def __post_init__(self):
        if not (len(self.columns) == len(self.mean) == len(self.std)):
            raise ValueError("standardizer arrays disagree in length")
        if np.any(self.std < 0):
            raise ValueError("standard deviations must be non-negative")

    @property
    def constant_columns(self) -> list[str]:
        return [c for c, s in zip(self.columns, self.std) if s == 0]


def _check_rows(rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.intp)
    if rows.size == 0:
        raise ValueError("cannot fit on an empty row set")
    return rows


def numeric_features(table: RawTable) -> list[str]:
    return [c.name for c in table.schema if c.kind == NUMERIC and c.name != table.label_column]


def fit_standardizer(
    table: RawTable, rows, columns: Sequence[str] | None = None
) -> Standardizer:
    """Fit mean / population std over exactly ``rows`` of the numeric feature columns."""
    rows = _check_rows(rows)
    columns = numeric_features(table) if columns is None else list(columns)
    means = np.empty(len(columns))
    stds = np.empty(len(columns))
    for j, name in enumerate(columns):
        if table.kind(name) != NUMERIC:
            raise DataError(f"column {name!r} is not numeric")
        x = table.column(name)[rows]
        if not np.all(np.isfinite(x)):
            raise DataError(f"column {name!r} has non-finite values; clean first")
        means[j] = x.mean()
        stds[j] = x.std()
    return Standardizer(tuple(columns), means, stds, int(rows.size))


def apply_standardizer(standardizer: Standardizer, table: RawTable) -> RawTable:
    """Map each fitted column to ``(x - mean) / std``; zero-variance columns become 0."""
    updates = {}
    for name, mu, sigma in zip(standardizer.columns, standardizer.mean, standardizer.std):
        if name not in table or table.kind(name) != NUMERIC:
            raise DataError(f"column mismatch: numeric column {name!r} missing from table")
        x = table.column(name)
        z = np.zeros_like(x) if sigma == 0 else (x - mu) / sigma
        updates[name] = (NUMERIC, z, table.missing_mask(name))
    return table.replace_columns(updates)


@dataclass(frozen=True)
class CategoryEncoder:
    """Sorted vocabulary per categorical column; a value's code is its rank."""

    vocabularies: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, vocab in self.vocabularies.items():
            if list(vocab) != sorted(set(vocab)):
                raise ValueError(f"vocabulary for {name!r} is not sorted and distinct")

    def codes(self, column: str) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vocabularies[column])}

    def decode(self, column: str, codes) -> list[str]:
        vocab = self.vocabularies[column]
        return [vocab[int(c)] for c in codes]


def categorical_columns(table: RawTable) -> list[str]:
    return [c.name for c in table.schema if c.kind == CATEGORICAL]


def fit_encoder(table: RawTable, rows, columns: Sequence[str] | None = None) -> CategoryEncoder:
    rows = _check_rows(rows)
    columns = categorical_columns(table) if columns is None else list(columns)
    vocabularies = {}
    for name in columns:
        values = table.column(name)[rows]
        vocabularies[name] = tuple(sorted(set(values.tolist())))
    return CategoryEncoder(vocabularies)


def apply_encoder(encoder: CategoryEncoder, table: RawTable) -> RawTable:
    """Replace categorical cells with integer codes (as float64 numeric columns).

    Columns in the encoder that are absent from ``table`` are skipped, which
    lets the same encoder serve labelled and unlabelled inputs.
    """
    updates = {}
    for name, vocab in encoder.vocabularies.items():
        if name not in table:
            continue
        if table.kind(name) != CATEGORICAL:
            raise DataError(f"column {name!r} is not categorical")
        values = table.column(name)
        index = np.asarray(vocab, dtype=object)
        pos = np.searchsorted(index.astype(str), values.astype(str)) if len(values) else np.empty(0, int)
        pos = np.minimum(pos, max(len(vocab) - 1, 0))
        if len(values):
            hits = index[pos] == values if len(vocab) else np.zeros(len(values), dtype=bool)
            if not np.all(hits):
                raise UnseenCategoryError(name, values[np.flatnonzero(~hits)[0]])
        updates[name] = (NUMERIC, pos.astype(np.float64), np.zeros(len(values), dtype=bool))
    for col in table.schema:
        if col.kind == CATEGORICAL and col.name not in updates:
            raise DataError(f"no encoding fitted for categorical column {col.name!r}")
    return table.replace_columns(updates)


def decode_table(encoder: CategoryEncoder, table: RawTable) -> RawTable:
    """Inverse of :func:`apply_encoder` for the encoder's columns."""
    updates = {}
    for name, vocab in encoder.vocabularies.items():
        if name not in table:
            continue
        values = np.empty(table.row_count, dtype=object)
        values[:] = [vocab[int(c)] for c in table.column(name)]
        updates[name] = (CATEGORICAL, values, np.zeros(table.row_count, dtype=bool))
    return table.replace_columns(updates)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int
    train_indices: np.ndarray
    test_indices: np.ndarray
    stratified: bool = False


def train_test_split(
    row_count: int,
    train_fraction: float = 0.7,
    seed: int = 42,
    labels=None,
) -> SplitSpec:
    """Seeded random partition of ``range(row_count)``.

    The first ``floor(train_fraction * row_count)`` positions of a random
    permutation form the training set. When ``labels`` is given the split is
    stratified: each class contributes its floor share, and the leftover
    training slots go to the classes with the largest fractional remainders.
    """
    if row_count < 2:
        raise ValueError(f"need at least 2 rows to split, got {row_count}")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n_train = int(np.floor(train_fraction * row_count))
    rng = np.random.default_rng(seed)
    if labels is None:
        perm = rng.permutation(row_count)
        return SplitSpec(train_fraction, seed, np.sort(perm[:n_train]), np.sort(perm[n_train:]))

    labels = np.asarray(labels)
    if len(labels) != row_count:
        raise ValueError("labels length does not match row_count")
    classes, inverse = np.unique(labels, return_inverse=True)
    counts = np.bincount(inverse, minlength=len(classes))
    exact = train_fraction * counts
    quota = np.floor(exact).astype(int)
    leftover = n_train - quota.sum()
    order = np.lexsort((np.arange(len(classes)), -(exact - quota)))
    quota[order[:leftover]] += 1
    train, test = [], []
    for c in range(len(classes)):
        members = rng.permutation(np.flatnonzero(inverse == c))
        train.append(members[: quota[c]])
        test.append(members[quota[c]:])
    return SplitSpec(
        train_fraction,
        seed,
        np.sort(np.concatenate(train)),
        np.sort(np.concatenate(test)),
        stratified=True,
    )


@dataclass(frozen=True)
class PreprocessModel:
    """Fitted transforms needed to turn a raw table into model inputs."""

    feature_names: tuple[str, ...]
    feature_kinds: tuple[str, ...]
    label_column: str | None
    standardizer: Standardizer
    encoder: CategoryEncoder
    split_seed: int
    train_fraction: float
    stratified: bool = False

    @property
    def classes(self) -> tuple[str, ...]:
        if self.label_column is None:
            return ()
        return tuple(self.encoder.vocabularies[self.label_column])

    def transform(self, table: RawTable, with_label: bool = True):
        """Encoded feature matrix, plus label codes when ``with_label``."""
        missing = [n for n in self.feature_names if n not in table]
        if with_label and self.label_column not in table:
            missing.append(self.label_column)
        if missing:
            raise DataError(f"schema mismatch: columns missing from input: {missing}")
        for name, kind in zip(self.feature_names, self.feature_kinds):
            if table.kind(name) != kind:
                raise DataError(
                    f"schema mismatch: column {name!r} is {table.kind(name)}, model expects {kind}"
                )
        keep = list(self.feature_names) + ([self.label_column] if with_label else [])
        sub = table.select(keep)
        sub = apply_encoder(self.encoder, apply_standardizer(self.standardizer, sub))
        X = sub.to_matrix(self.feature_names)
        if not with_label:
            return X
        return X, sub.column(self.label_column).astype(np.intp)


def fit_preprocess(
    table: RawTable, train_rows, split_seed: int = 42, train_fraction: float = 0.7
) -> PreprocessModel:
    """Fit standardizer and feature encoders on the training rows of a cleaned table.

    The label vocabulary is taken from every row so that a rare class that
    lands wholly in the test split still has a code.
    """
    if table.label_column is None:
        raise DataError("table has no label column")
    label = table.label_column
    features = table.feature_names()
    standardizer = fit_standardizer(table, train_rows)
    for name in standardizer.constant_columns:
        log.warning("column %r is constant on the training rows; it standardizes to 0", name)
    feature_cats = [c for c in categorical_columns(table) if c != label]
    vocabularies = dict(fit_encoder(table, train_rows, feature_cats).vocabularies)
    vocabularies[label] = fit_encoder(table, np.arange(table.row_count), [label]).vocabularies[label]
    encoder = CategoryEncoder(vocabularies)
    return PreprocessModel(
        feature_names=tuple(features),
        feature_kinds=tuple(table.kind(n) for n in features),
        label_column=table.label_column,
        standardizer=standardizer,
        encoder=encoder,
        split_seed=split_seed,
        train_fraction=train_fraction,
    )
