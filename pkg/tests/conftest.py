import csv
from contextlib import contextmanager

import numpy as np
import pytest

_CRITERIA = []


@contextmanager
def _record(cid, title):
    entry = {"id": cid, "title": title, "ok": False, "detail": ""}
    _CRITERIA.append(entry)
    yield entry
    entry["ok"] = True


@pytest.fixture
def criterion():
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for e in _CRITERIA:
        status = "PASS" if e["ok"] else "FAIL"
        detail = f"  ({e['detail']})" if e["detail"] else ""
        terminalreporter.write_line(f"[{status}] {e['id']}: {e['title']}{detail}")


def make_blobs(n_rows, n_features, n_classes, seed, spread=1.0, sep=6.0):
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, sep, size=(n_classes, n_features))
    y = rng.integers(0, n_classes, size=n_rows)
    X = centers[y] + rng.normal(0.0, spread, size=(n_rows, n_features))
    return X, y


def write_blob_csv(path, n_rows=300, n_features=4, class_names=("Attack", "Benign"),
                   seed=0, spread=1.0, sep=6.0, with_label=True):
    X, y = make_blobs(n_rows, n_features, len(class_names), seed, spread, sep)
    header = [f"feat_{j}" for j in range(n_features)] + (["label"] if with_label else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row, c in zip(X, y):
            w.writerow([repr(float(v)) for v in row] + ([class_names[c]] if with_label else []))
    return X, y


@pytest.fixture
def blob_csv(tmp_path):
    path = tmp_path / "blobs.csv"
    write_blob_csv(path)
    return path
