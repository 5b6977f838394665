"""Stratified splitting, confusion matrices, and the global advisory report.

Metrics follow the usual one-vs-rest definitions: precision TP/(TP+FP),
recall TP/(TP+FN), F-measure their harmonic mean. A zero denominator makes
a metric undefined, which is reported as "n/a" and never treated as zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInputError, SplitSizeError
from .records import DEFECT, NO_DEFECT, CoilRecord, SpeedClass
from .tree import label_records


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count matrix indexed (actual, predicted) over a fixed label order."""

    labels: tuple[str, ...]
    counts: np.ndarray

    @classmethod
    def from_pairs(cls, labels: Sequence[str], actual: Sequence[str],
                   predicted: Sequence[str]) -> "ConfusionMatrix":
        if len(actual) != len(predicted):
            raise InvalidInputError("actual and predicted lengths differ")
        index = {label: i for i, label in enumerate(labels)}
        counts = np.zeros((len(labels), len(labels)), dtype=int)
        for a, p in zip(actual, predicted):
            try:
                counts[index[a], index[p]] += 1
            except KeyError as exc:
                raise InvalidInputError(f"unknown class {exc.args[0]!r}") from exc
        return cls(tuple(labels), counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def actual_count(self, label: str) -> int:
        return int(self.counts[self.labels.index(label)].sum())

    def one_vs_rest(self, label: str) -> tuple[int, int, int, int]:
        """(TP, FP, FN, TN) treating ``label`` as the positive class."""
        i = self.labels.index(label)
        tp = int(self.counts[i, i])
        fp = int(self.counts[:, i].sum()) - tp
        fn = int(self.counts[i, :].sum()) - tp
        tn = self.total - tp - fp - fn
        return tp, fp, fn, tn

    def accuracy(self) -> float | None:
        if self.total == 0:
            return None
        return float(np.trace(self.counts)) / self.total


def precision(tp: int, fp: int) -> float | None:
    if tp + fp == 0:
        return None
    return tp / (tp + fp)


def recall(tp: int, fn: int) -> float | None:
    if tp + fn == 0:
        return None
    return tp / (tp + fn)


def f_measure(p: float | None, r: float | None) -> float | None:
    if p is None or r is None or p + r == 0:
        return None
    return 2 * p * r / (p + r)


def false_alarm_rate(matrix: ConfusionMatrix) -> float | None:
    """Share of actually clear coils flagged defective.

    The matrix must use the binary defect/no-defect labels.
    """
    if set(matrix.labels) != {DEFECT, NO_DEFECT}:
        raise InvalidInputError("false alarm rate needs a defect/no-defect matrix")
    a = matrix.labels.index(NO_DEFECT)
    p = matrix.labels.index(DEFECT)
    negatives = int(matrix.counts[a].sum())
    if negatives == 0:
        return None
    return int(matrix.counts[a, p]) / negatives


def format_metric(value: float | None, digits: int = 6) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"


# ---------------------------------------------------------------------------
# Stratified holdout split
# ---------------------------------------------------------------------------

def stratified_split(
    records: Sequence[CoilRecord],
    train_fraction: float = 0.75,
    seed: int = 0,
) -> tuple[list[CoilRecord], list[CoilRecord]]:
    """Partition records per defect class, preserving the class balance.

    Deterministic for a given seed. Both sides keep the original record
    order. Each class must land at least 2 records on each side.
    """
    if not 0.0 < train_fraction < 1.0:
        raise InvalidInputError("train fraction must lie strictly between 0 and 1")
    if len(records) == 0:
        raise InvalidInputError("cannot split an empty dataset")
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    for flag in (False, True):
        members = np.array([i for i, r in enumerate(records) if r.under_p is flag])
        n_class = len(members)
        n_train = round(train_fraction * n_class)
        if n_train < 2 or n_class - n_train < 2:
            label = DEFECT if flag else NO_DEFECT
            raise SplitSizeError(
                f"class {label} would keep fewer than 2 records on one side "
                f"({n_train} train / {n_class - n_train} validation)")
        chosen = rng.permutation(members)[:n_train]
        train_idx.extend(int(i) for i in chosen)
    picked = set(train_idx)
    train = [records[i] for i in range(len(records)) if i in picked]
    validation = [records[i] for i in range(len(records)) if i not in picked]
    return train, validation


# ---------------------------------------------------------------------------
# Global advisory-path evaluation
# ---------------------------------------------------------------------------

#: Row order of the global report.
REPORT_CLASSES = (SpeedClass.U, SpeedClass.A, SpeedClass.B, SpeedClass.C)


@dataclass(frozen=True)
class GlobalReport:
    """Per-class precision/recall/F over the four speed classes."""

    matrix: ConfusionMatrix
    evaluated: int
    excluded: int

    def metrics_row(self, label: str) -> tuple[float | None, float | None, float | None]:
        tp, fp, fn, _ = self.matrix.one_vs_rest(label)
        p = precision(tp, fp)
        r = recall(tp, fn)
        return p, r, f_measure(p, r)

    def accuracy(self) -> float | None:
        return self.matrix.accuracy()

    def false_alarm_rate(self) -> float | None:
        """Collapse to defect vs clear: class U counts as a defect call."""
        idx_u = self.matrix.labels.index(SpeedClass.U.value)
        clear_rows = [i for i in range(len(self.matrix.labels)) if i != idx_u]
        negatives = int(self.matrix.counts[clear_rows].sum())
        if negatives == 0:
            return None
        alarms = int(self.matrix.counts[clear_rows, idx_u].sum())
        return alarms / negatives

    def rows(self) -> list[dict]:
        out = []
        for cls in REPORT_CLASSES:
            p, r, f = self.metrics_row(cls.value)
            out.append({"class": cls.value, "precision": p, "recall": r,
                        "f_measure": f})
        return out

    def render(self) -> str:
        lines = [f"{'Class':<8}{'Precision':>12}{'Recall':>12}{'F-Measure':>12}"]
        for row in self.rows():
            lines.append(
                f"{row['class']:<8}"
                f"{format_metric(row['precision']):>12}"
                f"{format_metric(row['recall']):>12}"
                f"{format_metric(row['f_measure']):>12}")
        lines.append("")
        lines.append(f"records evaluated: {self.evaluated}")
        lines.append(f"records excluded (defective, not class U): {self.excluded}")
        lines.append(f"accuracy: {format_metric(self.accuracy())}")
        lines.append(f"false alarm rate: {format_metric(self.false_alarm_rate())}")
        return "\n".join(lines) + "\n"


def evaluate_global(tree, network, records: Sequence[CoilRecord], grid,
                    label_model=None) -> GlobalReport:
    """Score the advisory classification path on labeled validation records.

    Actual classes follow the labeling rule: U when ``label_model`` (the
    network itself by default; the exact kinetics oracle in tests) predicts
    a defect at every grid speed, otherwise the speed class of v for clear
    coils. Defective coils outside class U have no defined class and are
    excluded. The predicted class is U when the scan's lowest speed is
    already defective, otherwise the tree's output.
    """
    if label_model is None:
        label_model = network
    actual_classes = label_records(records, label_model, grid)

    kept = [i for i, cls in enumerate(actual_classes) if cls is not None]
    excluded = len(records) - len(kept)
    if not kept:
        raise InvalidInputError("no records with a defined actual class")

    from .advisor import bath_inputs

    v_min = grid.points()[0]
    rows = np.empty((len(kept), 8))
    for row, i in enumerate(kept):
        rows[row, :7] = bath_inputs(records[i])
        rows[row, 7] = v_min
    lowest_speed = network.predict_batch(rows)

    actual: list[str] = []
    predicted: list[str] = []
    for row, i in enumerate(kept):
        actual.append(actual_classes[i].value)
        if lowest_speed[row] == DEFECT:
            predicted.append(SpeedClass.U.value)
        else:
            predicted.append(tree.predict(
                {name: records[i].value(name) for name in tree.feature_names}).value)
    labels = tuple(cls.value for cls in REPORT_CLASSES)
    matrix = ConfusionMatrix.from_pairs(labels, actual, predicted)
    return GlobalReport(matrix=matrix, evaluated=len(kept), excluded=excluded)
