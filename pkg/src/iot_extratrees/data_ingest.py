"""CSV loading and column-role inference for flow-feature tables."""

from __future__ import annotations

import csv
import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"

_NUMBER_RE = re.compile(
    r"[+-]?(?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|inf|infinity|nan)",
    re.IGNORECASE,
)


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ValueError(f"unknown column kind {self.kind!r}")
        if self.index < 0:
            raise ValueError("column index must be non-negative")


def _validate_schema(schema: Sequence[ColumnSchema]) -> None:
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise DataError(f"duplicate column names: {dupes}")
    if [c.index for c in schema] != list(range(len(schema))):
        raise DataError("column indices must be 0..n-1 in order")


@dataclass(frozen=True, eq=False)
class RawTable:
    """Immutable column-oriented table.

    Numeric columns are float64 arrays (NaN where missing); categorical
    columns are object arrays of ``str`` (``""`` where missing). ``missing``
    holds one boolean mask per column so that a parsed ``"nan"`` token can be
    told apart from an empty cell.
    """

    schema: tuple[ColumnSchema, ...]
    columns: tuple[np.ndarray, ...]
    missing: tuple[np.ndarray, ...]
    label_column: str | None = None
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        schema = tuple(self.schema)
        object.__setattr__(self, "schema", schema)
        _validate_schema(schema)
        if len(self.columns) != len(schema) or len(self.missing) != len(schema):
            raise DataError("column data does not match schema width")
        lengths = {len(c) for c in self.columns} | {len(m) for m in self.missing}
        if len(lengths) > 1:
            raise DataError("columns have unequal lengths")
        for col, mask in zip(self.columns, self.missing):
            col.flags.writeable = False
            mask.flags.writeable = False
        object.__setattr__(self, "_lookup", {c.name: c.index for c in schema})
        if self.label_column is not None and self.label_column not in self._lookup:
            raise DataError(f"label column {self.label_column!r} not in table")

    @property
    def row_count(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.schema]

    def __len__(self) -> int:
        return self.row_count

    def __contains__(self, name: str) -> bool:
        return name in self._lookup

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[self._lookup[name]]
        except KeyError:
            raise KeyError(f"no column named {name!r}") from None

    def missing_mask(self, name: str) -> np.ndarray:
        return self.missing[self._lookup[name]]

    def kind(self, name: str) -> str:
        return self.schema[self._lookup[name]].kind

    def feature_names(self) -> list[str]:
        return [c.name for c in self.schema if c.name != self.label_column]

    def take(self, rows) -> "RawTable":
        """Row subset (or reordering) by integer index array."""
        rows = np.asarray(rows, dtype=np.intp)
        return RawTable(
            self.schema,
            tuple(c[rows] for c in self.columns),
            tuple(m[rows] for m in self.missing),
            self.label_column,
        )

    def select(self, names: Sequence[str]) -> "RawTable":
        """Column subset, re-indexed in the given order."""
        idx = [self._lookup[n] for n in names]
        schema = tuple(
            ColumnSchema(self.schema[i].name, self.schema[i].kind, j)
            for j, i in enumerate(idx)
        )
        label = self.label_column if self.label_column in names else None
        return RawTable(
            schema,
            tuple(self.columns[i] for i in idx),
            tuple(self.missing[i] for i in idx),
            label,
        )

    def replace_columns(self, updates: dict) -> "RawTable":
        """Return a copy with some columns swapped.

        ``updates`` maps a column name to ``(kind, values, missing)``.
        """
        schema, columns, masks = [], [], []
        for col in self.schema:
            if col.name in updates:
                kind, values, mask = updates[col.name]
            else:
                kind, values, mask = col.kind, self.columns[col.index], self.missing[col.index]
            schema.append(ColumnSchema(col.name, kind, col.index))
            columns.append(values)
            masks.append(mask)
        return RawTable(tuple(schema), tuple(columns), tuple(masks), self.label_column)

    def to_matrix(self, names: Sequence[str] | None = None) -> np.ndarray:
        """Stack numeric columns into a C-ordered ``(rows, len(names))`` float array."""
        names = self.names if names is None else list(names)
        out = np.empty((self.row_count, len(names)), dtype=np.float64)
        for j, name in enumerate(names):
            if self.kind(name) != NUMERIC:
                raise DataError(f"column {name!r} is not numeric")
            out[:, j] = self.column(name)
        return out

    def text_cells(self, name: str) -> list[str]:
        """Cells of one column rendered back to CSV text."""
        values = self.column(name)
        mask = self.missing_mask(name)
        if self.kind(name) == CATEGORICAL:
            return [str(v) for v in values]
        return ["" if m else format_number(v) for v, m in zip(values.tolist(), mask.tolist())]

    def equals(self, other: "RawTable") -> bool:
        """Structural identity: schema, label, masks and cell values."""
        if self.schema != other.schema or self.label_column != other.label_column:
            return False
        for a, b, ma, mb in zip(self.columns, other.columns, self.missing, other.missing):
            if not np.array_equal(ma, mb):
                return False
            if a.dtype.kind == "f" and b.dtype.kind == "f":
                if not np.array_equal(a, b, equal_nan=True):
                    return False
            elif a.dtype != b.dtype or not np.array_equal(a, b):
                return False
        return True


def format_number(value: float) -> str:
    if value != value:
        return "nan"
    if value in (np.inf, -np.inf):
        return "inf" if value > 0 else "-inf"
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def is_number(text: str) -> bool:
    return _NUMBER_RE.fullmatch(text) is not None


def _column_is_numeric(cells: Iterable[str]) -> bool:
    # Checking distinct values keeps this cheap on low-cardinality columns.
    return all(is_number(c) for c in set(cells) if c != "")


def _parse_numeric(name: str, cells: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    mask = np.fromiter((c == "" for c in cells), dtype=bool, count=len(cells))
    values = np.empty(len(cells), dtype=np.float64)
    for i, c in enumerate(cells):
        if c == "":
            values[i] = np.nan
        elif is_number(c):
            values[i] = float(c)
        else:
            raise DataError(f"column {name!r}: cannot parse {c!r} as a number (row {i + 1})")
    return values, mask


def _categorical(cells: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    values = np.empty(len(cells), dtype=object)
    values[:] = list(cells)
    mask = np.fromiter((c == "" for c in cells), dtype=bool, count=len(cells))
    return values, mask


def infer_schema(table: RawTable) -> list[ColumnSchema]:
    """Decide numeric vs categorical for every column of ``table``.

    A column is numeric iff each non-empty cell is a decimal or scientific
    number, or one of the ``inf``/``-inf``/``nan`` tokens. The label column
    is always categorical.
    """
    schema = []
    for col in table.schema:
        if col.name == table.label_column:
            kind = CATEGORICAL
        elif col.kind == NUMERIC:
            kind = NUMERIC
        else:
            kind = NUMERIC if _column_is_numeric(table.columns[col.index]) else CATEGORICAL
        schema.append(ColumnSchema(col.name, kind, col.index))
    return schema


def apply_schema(table: RawTable, schema: Sequence[ColumnSchema]) -> RawTable:
    """Convert columns of ``table`` to the kinds named in ``schema``."""
    updates = {}
    for col in schema:
        if table.kind(col.name) == col.kind:
            continue
        cells = table.text_cells(col.name)
        if col.kind == NUMERIC:
            updates[col.name] = (NUMERIC, *_parse_numeric(col.name, cells))
        else:
            updates[col.name] = (CATEGORICAL, *_categorical(cells))
    return table.replace_columns(updates) if updates else table


def table_from_rows(
    header: Sequence[str],
    rows: Sequence[Sequence[str]],
    label_column: str | None = None,
    kinds: dict[str, str] | None = None,
) -> RawTable:
    """Build a typed table from text rows, inferring kinds not given in ``kinds``."""
    header = list(header)
    if label_column is not None and label_column not in header:
        raise DataError(f"label column {label_column!r} not found in header")
    kinds = kinds or {}
    schema, columns, masks = [], [], []
    for j, name in enumerate(header):
        cells = [r[j] for r in rows]
        if name == label_column:
            kind = CATEGORICAL
        elif name in kinds:
            kind = kinds[name]
        else:
            kind = NUMERIC if _column_is_numeric(cells) else CATEGORICAL
        if kind == NUMERIC:
            values, mask = _parse_numeric(name, cells)
        else:
            values, mask = _categorical(cells)
        schema.append(ColumnSchema(name, kind, j))
        columns.append(values)
        masks.append(mask)
    return RawTable(tuple(schema), tuple(columns), tuple(masks), label_column)


def load_csv(
    path: str | os.PathLike,
    label_column: str | None = None,
    delimiter: str = ",",
    *,
    max_rows: int | None = None,
    include: Sequence[str] | None = None,
    exclude: Sequence[str] | None = None,
    kinds: dict[str, str] | None = None,
) -> RawTable:
    """Read a headered CSV file into a :class:`RawTable`.

    Rows are streamed; only the kept columns are retained and reading stops
    after ``max_rows`` data records. Ragged records raise :class:`DataError`
    naming the 1-based data row.
    """
    if len(delimiter) != 1:
        raise ValueError("delimiter must be a single character")
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(f"input file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file (no header row)") from None
        header = [h.strip() for h in header]
        if label_column is not None and label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not found in header")
        for name in list(include or []) + list(exclude or []):
            if name not in header:
                raise DataError(f"{path}: column {name!r} not found in header")

        keep = list(range(len(header)))
        if include:
            wanted = set(include) | ({label_column} if label_column else set())
            keep = [j for j in keep if header[j] in wanted]
        if exclude:
            dropped = set(exclude) - {label_column}
            keep = [j for j in keep if header[j] not in dropped]

        width = len(header)
        rows = []
        for rownum, record in enumerate(reader, start=1):
            if max_rows is not None and len(rows) >= max_rows:
                break
            if len(record) != width:
                raise DataError(
                    f"{path}: row {rownum} has {len(record)} cells, expected {width}"
                )
            rows.append([record[j] for j in keep])

    return table_from_rows([header[j] for j in keep], rows, label_column, kinds)


def write_csv(table: RawTable, path: str | os.PathLike, delimiter: str = ",") -> None:
    """Write ``table`` as CSV; values round-trip through :func:`load_csv`."""
    cols = [table.text_cells(name) for name in table.names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow(table.names)
        writer.writerows(zip(*cols))
