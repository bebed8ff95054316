"""Binary classification metrics with anomaly as the positive class.

Zero-denominator conventions: precision (recall) is reported as 0 when no
positive predictions (no positive labels) exist, and the report flags the
degenerate case so downstream consumers can tell 0 from "undefined".
Threshold comparisons are inclusive (score >= threshold) everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(labels, predictions) -> Confusion:
    labels = np.asarray(labels).astype(bool)
    predictions = np.asarray(predictions).astype(bool)
    if labels.shape != predictions.shape:
        raise ValueError(
            f"length mismatch: {labels.shape} labels vs {predictions.shape} predictions"
        )
    if labels.size < 1:
        raise ValueError("need at least one sample")
    tp = int(np.sum(labels & predictions))
    fp = int(np.sum(~labels & predictions))
    tn = int(np.sum(~labels & ~predictions))
    fn = int(np.sum(labels & ~predictions))
    return Confusion(tp, fp, tn, fn)


def precision_recall(c: Confusion) -> tuple[float, float]:
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) > 0 else 0.0
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) > 0 else 0.0
    return precision, recall


def f_beta(precision: float, recall: float, beta: float = 2.0) -> float:
    """Weighted harmonic mean of precision and recall; beta = 2 weights
    recall twice as much as precision."""
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    denom = beta * beta * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * precision * recall / denom


def tpr_fpr(c: Confusion) -> tuple[float, float]:
    tpr = c.tp / (c.tp + c.fn) if (c.tp + c.fn) > 0 else 0.0
    fpr = c.fp / (c.tn + c.fp) if (c.tn + c.fp) > 0 else 0.0
    return tpr, fpr


@dataclass(frozen=True)
class RocCurve:
    """Operating points from a full threshold sweep, (0,0) to (1,1)."""

    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def roc_curve(labels, scores) -> RocCurve:
    """Threshold sweep over the distinct scores (prediction: score >= t).

    Tied scores collapse into a single operating point. Requires at least
    one positive and one negative label.
    """
    labels = np.asarray(labels).astype(bool)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise ValueError("labels and scores must have equal length")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs at least one positive and one negative label")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    cum_tp = np.cumsum(sorted_labels)
    cum_fp = np.cumsum(~sorted_labels)
    # keep only the last entry of each tied-score group
    distinct = np.append(sorted_scores[1:] != sorted_scores[:-1], True)
    tpr = np.concatenate([[0.0], cum_tp[distinct] / n_pos])
    fpr = np.concatenate([[0.0], cum_fp[distinct] / n_neg])
    return RocCurve(fpr, tpr, auc_trapezoid(fpr, tpr))


def auc_trapezoid(fpr: np.ndarray, tpr: np.ndarray) -> float:
    """Trapezoidal area under the (fpr, tpr) polyline."""
    return float(np.trapezoid(tpr, fpr))


def auc(curve: RocCurve) -> float:
    return auc_trapezoid(curve.fpr, curve.tpr)


@dataclass(frozen=True)
class MetricsReport:
    """Fixed-operating-point metrics plus the threshold-sweep AUC."""

    confusion: Confusion
    precision: float
    recall: float
    f_beta: float
    beta: float
    auc: float
    precision_defined: bool = True
    recall_defined: bool = True
    roc: RocCurve | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "tp": self.confusion.tp,
            "fp": self.confusion.fp,
            "tn": self.confusion.tn,
            "fn": self.confusion.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f_beta": self.f_beta,
            "beta": self.beta,
            "auc": self.auc,
            "precision_defined": self.precision_defined,
            "recall_defined": self.recall_defined,
        }


def evaluate_scores(
    labels, scores, predictions, beta: float = 2.0, keep_roc: bool = False
) -> MetricsReport:
    """Bundle the fixed-threshold confusion metrics with the ROC AUC."""
    c = confusion(labels, predictions)
    precision, recall = precision_recall(c)
    curve = roc_curve(labels, scores)
    return MetricsReport(
        confusion=c,
        precision=precision,
        recall=recall,
        f_beta=f_beta(precision, recall, beta),
        beta=beta,
        auc=curve.auc,
        precision_defined=(c.tp + c.fp) > 0,
        recall_defined=(c.tp + c.fn) > 0,
        roc=curve if keep_roc else None,
    )
