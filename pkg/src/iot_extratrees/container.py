"""Binary model container (``.etg``).

Layout, all integers little-endian::

    magic     8 bytes   b"ETGMODEL"
    version   u32       FORMAT_VERSION
    length    u64       payload size in bytes
    payload   length    sections below
    digest    32 bytes  SHA-256 of payload

Payload sections, in order: class vocabulary, feature names, ensemble
parameters, preprocess model (flag byte, then fields), trees. Strings are
``u32`` byte length + UTF-8; arrays are raw ``<i4`` / ``<i8`` / ``<f8``.
Each tree is stored as its preorder node arrays.
"""

from __future__ import annotations

import hashlib
import os
import struct
import tempfile

import numpy as np

from .ensemble import EnsembleParams, ExtraTreesModel
from .preprocess import CategoryEncoder, PreprocessModel, Standardizer
from .tree import DecisionTree, TreeParams

MAGIC = b"ETGMODEL"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIQ")


class ModelFormatError(ValueError):
    pass


class ModelVersionError(ModelFormatError):
    def __init__(self, found: int, supported: int = FORMAT_VERSION):
        super().__init__(
            f"unsupported model format version {found} (this build reads version {supported})"
        )
        self.found = found
        self.supported = supported


class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []

    def pack(self, fmt: str, *values):
        self.parts.append(struct.pack("<" + fmt, *values))

    def text(self, s: str):
        raw = s.encode("utf-8")
        self.pack("I", len(raw))
        self.parts.append(raw)

    def texts(self, items):
        items = list(items)
        self.pack("I", len(items))
        for s in items:
            self.text(s)

    def opt_text(self, s):
        self.pack("B", s is not None)
        if s is not None:
            self.text(s)

    def array(self, arr, dtype: str):
        self.parts.append(np.ascontiguousarray(arr, dtype=dtype).tobytes())

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise ModelFormatError("model payload ends unexpectedly")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        s = struct.Struct("<" + fmt)
        values = s.unpack(self._take(s.size))
        return values[0] if len(values) == 1 else values

    def text(self) -> str:
        return self._take(self.unpack("I")).decode("utf-8")

    def texts(self) -> list[str]:
        return [self.text() for _ in range(self.unpack("I"))]

    def opt_text(self):
        return self.text() if self.unpack("B") else None

    def array(self, dtype: str, count: int) -> np.ndarray:
        dt = np.dtype(dtype)
        return np.frombuffer(self._take(dt.itemsize * count), dtype=dt).copy()


def _write_params(w: _Writer, p: EnsembleParams):
    tp = p.tree_params
    w.pack("II", p.n_trees, tp.k_features or 0)
    w.pack("q", -1 if tp.max_depth is None else tp.max_depth)
    w.pack("II", tp.min_samples_split, tp.min_samples_leaf)
    w.text(tp.splitter)
    w.text(tp.impurity)
    w.pack("BQ", p.bootstrap, p.seed)


def _read_params(r: _Reader) -> EnsembleParams:
    n_trees, k = r.unpack("II")
    max_depth = r.unpack("q")
    min_split, min_leaf = r.unpack("II")
    splitter = r.text()
    impurity = r.text()
    bootstrap, seed = r.unpack("BQ")
    tp = TreeParams(
        k_features=k or None,
        max_depth=None if max_depth < 0 else max_depth,
        min_samples_split=min_split,
        min_samples_leaf=min_leaf,
        splitter=splitter,
        impurity=impurity,
    )
    return EnsembleParams(n_trees, tp, bool(bootstrap), seed)


def _write_preprocess(w: _Writer, pre: PreprocessModel | None):
    w.pack("B", pre is not None)
    if pre is None:
        return
    w.opt_text(pre.label_column)
    w.texts(pre.feature_names)
    w.texts(pre.feature_kinds)
    st = pre.standardizer
    w.texts(st.columns)
    w.array(st.mean, "<f8")
    w.array(st.std, "<f8")
    w.pack("Q", st.fitted_on_rows)
    vocabs = pre.encoder.vocabularies
    w.pack("I", len(vocabs))
    for name, vocab in vocabs.items():
        w.text(name)
        w.texts(vocab)
    w.pack("QdB", pre.split_seed, pre.train_fraction, pre.stratified)


def _read_preprocess(r: _Reader) -> PreprocessModel | None:
    if not r.unpack("B"):
        return None
    label = r.opt_text()
    names = tuple(r.texts())
    kinds = tuple(r.texts())
    cols = tuple(r.texts())
    mean = r.array("<f8", len(cols))
    std = r.array("<f8", len(cols))
    fitted = r.unpack("Q")
    vocabs = {}
    for _ in range(r.unpack("I")):
        name = r.text()
        vocabs[name] = tuple(r.texts())
    split_seed, fraction, stratified = r.unpack("QdB")
    return PreprocessModel(
        feature_names=names,
        feature_kinds=kinds,
        label_column=label,
        standardizer=Standardizer(cols, mean, std, fitted),
        encoder=CategoryEncoder(vocabs),
        split_seed=split_seed,
        train_fraction=fraction,
        stratified=bool(stratified),
    )


def dumps(model: ExtraTreesModel) -> bytes:
    w = _Writer()
    w.texts(model.classes)
    w.texts(model.feature_names)
    _write_params(w, model.params)
    _write_preprocess(w, model.preprocess)
    w.pack("I", len(model.trees))
    for t in model.trees:
        n = t.n_nodes
        w.pack("QIII", t.seed, n, t.n_features, t.n_classes)
        w.array(t.feature, "<i4")
        w.array(t.threshold, "<f8")
        w.array(t.left, "<i4")
        w.array(t.right, "<i4")
        w.array(t.class_counts, "<i8")
    payload = w.getvalue()
    return (
        _HEADER.pack(MAGIC, FORMAT_VERSION, len(payload))
        + payload
        + hashlib.sha256(payload).digest()
    )


def loads(buf: bytes) -> ExtraTreesModel:
    if len(buf) < _HEADER.size:
        raise ModelFormatError("file too short to be a model container")
    magic, version, length = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise ModelFormatError(f"bad magic bytes {magic!r}; not an .etg model file")
    if version != FORMAT_VERSION:
        raise ModelVersionError(version)
    body = buf[_HEADER.size:]
    if len(body) != length + 32:
        raise ModelFormatError(
            f"model file truncated or padded: expected {length + 32} bytes after header, got {len(body)}"
        )
    payload, digest = body[:length], body[length:]
    if hashlib.sha256(payload).digest() != digest:
        raise ModelFormatError("model checksum mismatch; file is corrupt")

    r = _Reader(payload)
    classes = tuple(r.texts())
    features = tuple(r.texts())
    params = _read_params(r)
    pre = _read_preprocess(r)
    trees = []
    for _ in range(r.unpack("I")):
        seed, n, m, c = r.unpack("QIII")
        trees.append(
            DecisionTree(
                feature=r.array("<i4", n),
                threshold=r.array("<f8", n),
                left=r.array("<i4", n),
                right=r.array("<i4", n),
                class_counts=r.array("<i8", n * c).reshape(n, c),
                n_features=m,
                params=params.tree_params,
                seed=seed,
            )
        )
    if r.pos != len(payload):
        raise ModelFormatError("trailing bytes in model payload")
    return ExtraTreesModel(tuple(trees), classes, features, params, pre)


def atomic_write(path: str | os.PathLike, data: bytes) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(model: ExtraTreesModel, path: str | os.PathLike) -> None:
    atomic_write(path, dumps(model))


def load_model(path: str | os.PathLike) -> ExtraTreesModel:
    with open(path, "rb") as fh:
        return loads(fh.read())
