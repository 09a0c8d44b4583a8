"""Evaluation KPIs: MSE, RMSE, confusion matrix, per-class report, accuracy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import EmptyInput, EmptyMatrix, LengthMismatch, UnknownLabel


def mse(y, yhat) -> float:
    a = np.asarray(y, dtype=np.float64)
    b = np.asarray(yhat, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"lengths {a.shape} vs {b.shape}")
    if a.size == 0:
        raise EmptyInput("mse of empty arrays")
    diff = a - b
    return float(np.mean(diff * diff))


def rmse(y, yhat) -> float:
    return math.sqrt(mse(y, yhat))


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[i][j] = samples with true class classes[i] predicted as classes[j]."""

    classes: tuple[Hashable, ...]
    counts: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", np.asarray(self.counts, dtype=np.int64))
        n = len(self.classes)
        if self.counts.shape != (n, n):
            raise ValueError(f"counts shape {self.counts.shape} != ({n}, {n})")
        if (self.counts < 0).any():
            raise ValueError("negative counts")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion(true_labels, pred_labels, classes: Sequence[Hashable]) -> ConfusionMatrix:
    """Count (true, predicted) pairs; labels outside `classes` are an error."""
    true_list = list(true_labels)
    pred_list = list(pred_labels)
    if len(true_list) != len(pred_list):
        raise LengthMismatch(f"{len(true_list)} true vs {len(pred_list)} predicted")
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(index), len(index)), dtype=np.int64)
    for t, p in zip(true_list, pred_list):
        if t not in index:
            raise UnknownLabel(f"true label {t!r} not in classes")
        if p not in index:
            raise UnknownLabel(f"predicted label {p!r} not in classes")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(tuple(classes), counts)


@dataclass(frozen=True)
class ClassMetrics:
    label: Hashable
    precision: float
    recall: float
    f1: float
    support: int
    degenerate: bool = False


@dataclass(frozen=True)
class ClassificationReport:
    per_class: tuple[ClassMetrics, ...]
    accuracy: float

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class": [
                {
                    "label": m.label,
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                    "degenerate": m.degenerate,
                }
                for m in self.per_class
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClassificationReport":
        rows = tuple(
            ClassMetrics(
                label=m["label"],
                precision=m["precision"],
                recall=m["recall"],
                f1=m["f1"],
                support=m["support"],
                degenerate=m.get("degenerate", False),
            )
            for m in data["per_class"]
        )
        return cls(rows, data["accuracy"])


def report(cm: ConfusionMatrix) -> ClassificationReport:
    """Per-class precision/recall/f1/support plus overall accuracy.

    Zero-support or never-predicted classes get 0 with a degenerate flag
    instead of NaN so reports stay serializable.
    """
    if len(cm.classes) == 0 or cm.total == 0:
        raise EmptyMatrix("confusion matrix has no samples")
    rows = []
    col_sums = cm.counts.sum(axis=0)
    row_sums = cm.counts.sum(axis=1)
    for i, label in enumerate(cm.classes):
        tp = int(cm.counts[i, i])
        degenerate = False
        if col_sums[i] == 0:
            precision, degenerate = 0.0, True
        else:
            precision = tp / int(col_sums[i])
        if row_sums[i] == 0:
            recall, degenerate = 0.0, True
        else:
            recall = tp / int(row_sums[i])
        if precision + recall == 0:
            f1, degenerate = 0.0, True
        else:
            f1 = 2.0 * precision * recall / (precision + recall)
        rows.append(ClassMetrics(label, precision, recall, f1, int(row_sums[i]), degenerate))
    accuracy = float(np.trace(cm.counts)) / cm.total
    return ClassificationReport(tuple(rows), accuracy)


def render_report(rep: ClassificationReport) -> str:
    """Fixed-width table rounded to 2 decimals, with a total-accuracy footer."""
    header = f"{'Class':>6}  {'Precision':>9}  {'Recall':>6}  {'f1-Sc.':>6}  {'Support':>7}"
    lines = [header, "-" * len(header)]
    for m in rep.per_class:
        lines.append(
            f"{str(m.label):>6}  {m.precision:>9.2f}  {m.recall:>6.2f}  {m.f1:>6.2f}  {m.support:>7d}"
        )
    lines.append("-" * len(header))
    lines.append(f"{'Acc':>6}  {'':>9}  {'':>6}  {rep.accuracy:>6.2f}  {'':>7}")
    return "\n".join(lines) + "\n"


def render_confusion_csv(cm: ConfusionMatrix) -> str:
    header = "true_class," + ",".join(f"pred_{c}" for c in cm.classes)
    lines = [header]
    for label, row in zip(cm.classes, cm.counts):
        lines.append(f"{label}," + ",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"
