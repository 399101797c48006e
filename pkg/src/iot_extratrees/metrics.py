"""Confusion-matrix based classification metrics.

Multiclass precision, recall and F1 are support-weighted averages of the
per-class one-vs-rest values unless ``averaging="macro"`` is requested.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

log = logging.getLogger(__name__)

AVERAGING_MODES = ("weighted", "macro")


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Counts with rows = true class, columns = predicted class."""

    counts: np.ndarray
    classes: tuple[str, ...] = ()

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError("confusion matrix must be square")
        if np.any(counts < 0):
            raise ValueError("confusion matrix counts must be non-negative")
        object.__setattr__(self, "counts", counts)
        if not self.classes:
            object.__setattr__(self, "classes", tuple(str(c) for c in range(len(counts))))

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def tp(self) -> np.ndarray:
        return np.diag(self.counts)

    @property
    def fn(self) -> np.ndarray:
        return self.counts.sum(axis=1) - self.tp

    @property
    def fp(self) -> np.ndarray:
        return self.counts.sum(axis=0) - self.tp

    @property
    def tn(self) -> np.ndarray:
        return self.n - self.tp - self.fn - self.fp

    @property
    def support(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["true\\predicted", *self.classes])
        for name, row in zip(self.classes, self.counts.tolist()):
            writer.writerow([name, *row])
        return buf.getvalue()


def build_confusion(y_true, y_pred, n_classes: int, classes: Sequence[str] = ()) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.intp)
    y_pred = np.asarray(y_pred, dtype=np.intp)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    if y_true.size == 0:
        raise ValueError("cannot build a confusion matrix from empty inputs")
    for ids in (y_true, y_pred):
        if ids.min() < 0 or ids.max() >= n_classes:
            raise ValueError(f"class id out of range [0, {n_classes})")
    counts = np.bincount(y_true * n_classes + y_pred, minlength=n_classes * n_classes)
    return ConfusionMatrix(counts.reshape(n_classes, n_classes), tuple(classes))


def _require_rows(cm: ConfusionMatrix) -> None:
    if cm.n == 0:
        raise ValueError("confusion matrix is empty")


def accuracy_and_error(cm: ConfusionMatrix) -> tuple[float, float]:
    _require_rows(cm)
    accuracy = int(cm.tp.sum()) / cm.n
    return accuracy, 1.0 - accuracy


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, int]:
    num = num.astype(np.float64)
    den = den.astype(np.float64)
    out = np.zeros_like(num)
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    return out, int(np.count_nonzero(~ok))


def per_class_scores(cm: ConfusionMatrix) -> dict:
    """Per-class precision/recall/F1 with 0 for zero denominators."""
    _require_rows(cm)
    tp, fp, fn = cm.tp, cm.fp, cm.fn
    precision, zp = _safe_ratio(tp, tp + fp)
    recall, zr = _safe_ratio(tp, tp + fn)
    f1, _ = _safe_ratio(2 * precision * recall, precision + recall)
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "support": cm.support,
        "zero_division": zp + zr,
    }


def _aggregate(values: np.ndarray, support: np.ndarray, averaging: str) -> float:
    if averaging == "weighted":
        return float(np.dot(values, support) / support.sum())
    if averaging == "macro":
        return float(values.mean())
    raise ValueError(f"averaging must be one of {AVERAGING_MODES}")


def weighted_precision_recall_f1(cm: ConfusionMatrix, averaging: str = "weighted"):
    """Aggregate precision, recall, F1 and the per-class table."""
    scores = per_class_scores(cm)
    if scores["zero_division"]:
        log.warning("%d precision/recall values had a zero denominator; set to 0",
                    scores["zero_division"])
    support = scores["support"]
    return (
        _aggregate(scores["precision"], support, averaging),
        _aggregate(scores["recall"], support, averaging),
        _aggregate(scores["f1"], support, averaging),
        scores,
    )


def cohen_kappa(cm: ConfusionMatrix) -> float:
    _require_rows(cm)
    n = cm.n
    p_o = int(cm.tp.sum()) / n
    p_e = float(np.dot(cm.counts.sum(axis=1), cm.counts.sum(axis=0))) / (n * n)
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1.0 - p_e)


def binary_auc(is_positive, scores) -> Optional[float]:
    """Probability that a random positive outscores a random negative (ties count 1/2)."""
    is_positive = np.asarray(is_positive, dtype=bool)
    n_pos = int(is_positive.sum())
    n_neg = len(is_positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)  # average ranks give tied pairs half credit
    u = ranks[is_positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_auc(y_true, scores, n_classes: int) -> tuple[float, list[Optional[float]]]:
    """One-vs-rest AUC per class and its support-weighted mean over defined classes.

    ``scores`` is ``(rows, n_classes)``; a 1-D array is taken as the
    positive-class score of a binary problem.
    """
    y_true = np.asarray(y_true, dtype=np.intp)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim == 1:
        if n_classes != 2:
            raise ValueError("1-D scores are only meaningful for two classes")
        scores = np.column_stack([1.0 - scores, scores])
    if scores.shape != (len(y_true), n_classes):
        raise ValueError(f"scores shape {scores.shape} does not match ({len(y_true)}, {n_classes})")

    per_class: list[Optional[float]] = []
    weights, values = [], []
    for c in range(n_classes):
        positive = y_true == c
        auc = binary_auc(positive, scores[:, c])
        per_class.append(auc)
        if auc is not None:
            weights.append(int(positive.sum()))
            values.append(auc)
    if not values:
        raise ValueError("AUC undefined: no class has both positive and negative rows")
    return float(np.dot(values, weights) / sum(weights)), per_class


@dataclass(frozen=True, eq=False)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    cohen_kappa: float
    auc: Optional[float]
    error_rate: float
    averaging: str
    confusion: ConfusionMatrix
    per_class: list = field(default_factory=list)
    zero_division: int = 0

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "cohen_kappa": self.cohen_kappa,
            "auc": self.auc,
            "error_rate": self.error_rate,
            "per_class": self.per_class,
            "averaging": self.averaging,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"

    def summary(self) -> str:
        auc = "undefined" if self.auc is None else f"{self.auc:.6f}"
        lines = [
            f"accuracy     {self.accuracy:.6f}",
            f"precision    {self.precision:.6f}",
            f"recall       {self.recall:.6f}",
            f"f1           {self.f1:.6f}",
            f"cohen_kappa  {self.cohen_kappa:.6f}",
            f"auc          {auc}",
            f"error_rate   {self.error_rate:.6f}",
        ]
        return "\n".join(lines) + "\n"

    def text_report(self) -> str:
        head = f"{'class':<28}{'precision':>10}{'recall':>10}{'f1':>10}{'auc':>10}{'support':>9}"
        rows = [head]
        for pc in self.per_class:
            auc = "-" if pc["auc"] is None else f"{pc['auc']:.5f}"
            rows.append(
                f"{pc['class']:<28}{pc['precision']:>10.5f}{pc['recall']:>10.5f}"
                f"{pc['f1']:>10.5f}{auc:>10}{pc['support']:>9d}"
            )
        extra = f"averaging: {self.averaging}\n"
        if self.zero_division:
            extra += f"zero-denominator precision/recall values set to 0: {self.zero_division}\n"
        return self.summary() + "\n" + "\n".join(rows) + "\n" + extra


def full_report(
    y_true,
    y_pred,
    scores,
    classes: Sequence[str],
    averaging: str = "weighted",
) -> MetricsReport:
    """All seven headline metrics plus the per-class breakdown.

    The AUC is ``None`` when no class has both positive and negative rows.
    """
    classes = tuple(classes)
    n_classes = len(classes)
    cm = build_confusion(y_true, y_pred, n_classes, classes)
    accuracy, error = accuracy_and_error(cm)
    precision, recall, f1, scores_pc = weighted_precision_recall_f1(cm, averaging)
    kappa = cohen_kappa(cm)
    try:
        auc, auc_pc = roc_auc(y_true, scores, n_classes)
    except ValueError as exc:
        if "undefined" not in str(exc):
            raise
        auc, auc_pc = None, [None] * n_classes

    per_class = []
    for c, name in enumerate(classes):
        p, r = float(scores_pc["precision"][c]), float(scores_pc["recall"][c])
        per_class.append({
            "class": name,
            "precision": p,
            "recall": r,
            "f1": float(scores_pc["f1"][c]),
            "auc": auc_pc[c],
            "support": int(scores_pc["support"][c]),
        })
    return MetricsReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        cohen_kappa=kappa,
        auc=auc,
        error_rate=error,
        averaging=averaging,
        confusion=cm,
        per_class=per_class,
        zero_division=scores_pc["zero_division"],
    )
