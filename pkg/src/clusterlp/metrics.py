"""Ranking and classification metrics for link prediction."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.stats import rankdata

logger = logging.getLogger(__name__)


def _validate(scores, labels):
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-d arrays of equal length")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    return s, y.astype(int)


def roc_auc(scores, labels) -> float:
    """Area under the ROC curve via the Mann-Whitney U statistic (ties count 1/2)."""
    s, y = _validate(scores, labels)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both positive and negative examples")
    ranks = rankdata(s)
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_curve_points(scores, labels):
    """False/true positive rates at every distinct threshold, from (0, 0) to (1, 1)."""
    s, y = _validate(scores, labels)
    if y.sum() == 0 or y.sum() == len(y):
        raise ValueError("ROC curve needs both positive and negative examples")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last_of_group = np.r_[np.flatnonzero(np.diff(s)), len(s) - 1]
    tps = np.cumsum(y)[last_of_group]
    fps = (last_of_group + 1) - tps
    tpr = np.r_[0.0, tps / y.sum()]
    fpr = np.r_[0.0, fps / (len(y) - y.sum())]
    return fpr, tpr


def roc_auc_trapezoid(scores, labels) -> float:
    """AUC by trapezoidal integration of the ROC curve."""
    fpr, tpr = roc_curve_points(scores, labels)
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


def average_precision(scores, labels) -> float:
    """Mean precision at the rank of each positive (descending score, stable ties)."""
    s, y = _validate(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise ValueError("average precision needs at least one positive")
    order = np.argsort(-s, kind="stable")
    hits = y[order]
    ranks = np.arange(1, len(hits) + 1)
    precision_at = np.cumsum(hits) / ranks
    return float(precision_at[hits == 1].sum() / n_pos)


@dataclass
class EvalReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    predicted_link_count: int
    threshold: float
    auc: float = float("nan")
    ap: float = float("nan")
    degenerate: bool = False

    def csv_row(self, header=False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = [f.name for f in fields(self)]
        if header:
            w.writerow(names)
        w.writerow([getattr(self, k) for k in names])
        return buf.getvalue()

    def text(self) -> str:
        rows = asdict(self)
        width = max(len(k) for k in rows)
        out = []
        for key, value in rows.items():
            shown = f"{value:.4f}" if isinstance(value, float) else str(value)
            out.append(f"{key:<{width}}  {shown}")
        return "\n".join(out)


def _confusion(pred, y):
    tp = int(np.sum(pred & (y == 1)))
    fp = int(np.sum(pred & (y == 0)))
    fn = int(np.sum(~pred & (y == 1)))
    tn = int(np.sum(~pred & (y == 0)))
    return tp, fp, fn, tn


def _prf(tp, fp, fn):
    degenerate = False
    if tp + fp == 0:
        precision, degenerate = 0.0, True
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall, degenerate = 0.0, True
    else:
        recall = tp / (tp + fn)
    f1 = 2 * precision * recall / (precision + recall) if precision and recall else 0.0
    return precision, recall, f1, degenerate


def classification_report(scores, labels, threshold: float = 0.5,
                          average: str = "binary") -> EvalReport:
    """Threshold ``scores`` (link iff score >= threshold) and summarise.

    ``average="macro"`` averages precision, recall and F1 over the two
    classes instead of reporting the positive class only.
    """
    s, y = _validate(scores, labels)
    if len(s) == 0:
        raise ValueError("empty input")
    pred = s >= threshold
    tp, fp, fn, tn = _confusion(pred, y)
    accuracy = (tp + tn) / len(y)
    if average == "binary":
        precision, recall, f1, degenerate = _prf(tp, fp, fn)
    elif average == "macro":
        p1, r1, f1_pos, d1 = _prf(tp, fp, fn)
        p0, r0, f1_neg, d0 = _prf(tn, fn, fp)
        precision, recall = (p1 + p0) / 2, (r1 + r0) / 2
        f1 = (f1_pos + f1_neg) / 2
        degenerate = d1 or d0
    else:
        raise ValueError(f"unknown average {average!r}")
    if degenerate:
        logger.warning("precision or recall undefined; reported as 0")
    return EvalReport(accuracy, precision, recall, f1, int(pred.sum()), threshold,
                      degenerate=degenerate)


def evaluate(scores, labels, threshold: float = 0.5) -> EvalReport:
    """Classification report plus AUC and AP where both classes are present."""
    report = classification_report(scores, labels, threshold)
    y = np.asarray(labels)
    if 0 < y.sum() < len(y):
        report.auc = roc_auc(scores, labels)
        report.ap = average_precision(scores, labels)
    return report


def full_matrix_report(P, A, threshold: float = 0.5) -> EvalReport:
    """Macro-averaged metrics over every entry of the ``N x N`` matrix.

    The diagonal is predicted absent. ``predicted_link_count`` counts
    unordered pairs for a symmetric ``A``.
    """
    P = np.array(P, dtype=float)
    np.fill_diagonal(P, 0.0)
    A = np.asarray(A)
    report = classification_report(P.ravel(), A.ravel().astype(int), threshold, average="macro")
    if np.array_equal(A, A.T):
        report.predicted_link_count //= 2
    return report
