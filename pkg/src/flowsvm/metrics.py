"""Confusion matrices and per-class precision / recall / F1 reports."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true classes, columns are predicted classes."""

    classes: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        k = len(self.classes)
        if counts.shape != (k, k):
            raise ValueError(f"counts must be {k}x{k}, got {counts.shape}")
        if np.any(counts < 0) or not np.all(np.equal(np.mod(counts, 1), 0)):
            raise ValueError("counts must be non-negative integers")
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "counts", counts.astype(np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def support(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["true\\predicted", *self.classes])
        for name, row in zip(self.classes, self.counts):
            w.writerow([name, *map(int, row)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ConfusionMatrix":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        classes = tuple(c.strip() for c in rows[0][1:])
        if [r[0].strip() for r in rows[1:]] != list(classes):
            raise ValueError("confusion CSV row names must match the column header")
        return cls(classes, np.array([[int(v) for v in r[1:]] for r in rows[1:]]))


def confusion(true_labels, predicted_labels, classes) -> ConfusionMatrix:
    true_labels, predicted_labels = list(true_labels), list(predicted_labels)
    if len(true_labels) != len(predicted_labels):
        raise ValueError(f"length mismatch: {len(true_labels)} true vs {len(predicted_labels)} predicted")
    index = {c: k for k, c in enumerate(classes)}
    counts = np.zeros((len(index), len(index)), dtype=np.int64)
    for t, p in zip(true_labels, predicted_labels):
        if t not in index or p not in index:
            bad = t if t not in index else p
            raise ValueError(f"label {bad!r} not in classes {list(classes)}")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(tuple(classes), counts)


@dataclass(frozen=True)
class ClassRow:
    name: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ClassReport:
    rows: tuple[ClassRow, ...]
    weighted: ClassRow  # support-weighted averages; support = total
    macro: ClassRow
    accuracy: float
    # classes whose precision or recall hit a zero denominator
    undefined: tuple[str, ...] = ()

    def row(self, name: str) -> ClassRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def render(self, title: str | None = None, digits: int = 2) -> str:
        width = max(len("Avg / Total"), *(len(r.name) for r in self.rows)) + 2
        fmt = f"{{:<{width}}}{{:>10}}{{:>10}}{{:>10}}{{:>10}}"
        lines = [title] if title else []
        lines.append(fmt.format("Flow Pattern", "Precision", "Recall", "F1", "Support"))
        for r in (*self.rows, self.weighted):
            name = "Avg / Total" if r is self.weighted else r.name
            lines.append(fmt.format(name, f"{r.precision:.{digits}f}", f"{r.recall:.{digits}f}",
                                    f"{r.f1:.{digits}f}", str(r.support)))
        lines.append(f"Accuracy: {self.accuracy:.{digits}f}")
        if self.undefined:
            lines.append(f"Warning: zero denominators for {', '.join(self.undefined)} (reported as 0)")
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class", "precision", "recall", "f1", "support"])
        for r in (*self.rows, self.weighted):
            name = "avg/total" if r is self.weighted else r.name
            w.writerow([name, repr(r.precision), repr(r.recall), repr(r.f1), r.support])
        return buf.getvalue()


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def report(cm: ConfusionMatrix) -> ClassReport:
    counts = cm.counts
    total = cm.total
    if total == 0:
        raise ValueError("confusion matrix is empty; nothing was scored")
    diag = np.diag(counts)
    col = counts.sum(axis=0)
    row = counts.sum(axis=1)
    rows, undefined = [], []
    for k, name in enumerate(cm.classes):
        p = diag[k] / col[k] if col[k] else 0.0
        r = diag[k] / row[k] if row[k] else 0.0
        if not col[k] or not row[k]:
            undefined.append(name)
        rows.append(ClassRow(name, float(p), float(r), _f1(float(p), float(r)), int(row[k])))
    w = row / total
    weighted = ClassRow(
        "avg/total",
        float(sum(wi * r.precision for wi, r in zip(w, rows))),
        float(sum(wi * r.recall for wi, r in zip(w, rows))),
        float(sum(wi * r.f1 for wi, r in zip(w, rows))),
        total,
    )
    k = len(rows)
    macro = ClassRow(
        "macro",
        sum(r.precision for r in rows) / k,
        sum(r.recall for r in rows) / k,
        sum(r.f1 for r in rows) / k,
        total,
    )
    return ClassReport(tuple(rows), weighted, macro, float(diag.sum() / total), tuple(undefined))


def accuracy(true_labels, predicted_labels) -> float:
    true_labels, predicted_labels = list(true_labels), list(predicted_labels)
    if len(true_labels) != len(predicted_labels):
        raise ValueError(f"length mismatch: {len(true_labels)} vs {len(predicted_labels)}")
    if not true_labels:
        raise ValueError("accuracy of an empty prediction list is undefined")
    return sum(t == p for t, p in zip(true_labels, predicted_labels)) / len(true_labels)


def render_confusion(cm: ConfusionMatrix, title: str | None = None) -> str:
    width = max(len("Flow Pattern"), *(len(c) for c in cm.classes)) + 2
    cell = max(6, *(len(c) + 2 for c in cm.classes))
    lines = [title] if title else []
    lines.append(f"{'Flow Pattern':<{width}}" + "".join(f"{c:>{cell}}" for c in cm.classes))
    for name, row in zip(cm.classes, cm.counts):
        lines.append(f"{name:<{width}}" + "".join(f"{int(v):>{cell}}" for v in row))
    return "\n".join(lines)
