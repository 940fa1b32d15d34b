"""Evaluation: accuracy, per-class precision/recall/F1, support-weighted F1,
confusion matrix, and rank-based ROC-AUC for the binary case.

Zero-division convention: precision, recall, and F1 are 0 whenever their
denominator is 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import EmptyEvalError, UndefinedAUCError


@dataclass
class EvalReport:
    accuracy: float
    precision: list[float]
    recall: list[float]
    f1: list[float]
    support: list[int]
    weighted_f1: float
    confusion: list[list[int]]  # confusion[true][pred]
    count: int
    roc_auc: float | None = None

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
            "weighted_f1": self.weighted_f1,
            "confusion": self.confusion,
            "count": self.count,
            "roc_auc": self.roc_auc,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def evaluate(
    predictions: np.ndarray,
    probabilities: np.ndarray,
    labels: np.ndarray,
    subset,
) -> EvalReport:
    """Score predictions on the given subset of indices.

    ROC-AUC is filled for two-class problems when both classes appear in the
    subset, and left as None otherwise.
    """
    subset = np.asarray(subset, dtype=np.intp)
    if subset.size == 0:
        raise EmptyEvalError("evaluation subset is empty")
    y = np.asarray(labels)[subset]
    if np.any(y < 0):
        raise ValueError("evaluation subset contains unlabeled documents")
    pred = np.asarray(predictions)[subset]
    n_class = probabilities.shape[1]
    confusion = np.zeros((n_class, n_class), dtype=np.intp)
    for t, p in zip(y, pred):
        confusion[t, p] += 1
    total = int(subset.size)
    tp = np.diag(confusion).astype(np.float64)
    fp = confusion.sum(axis=0) - tp
    fn = confusion.sum(axis=1) - tp
    support = confusion.sum(axis=1)

    precision = np.divide(tp, tp + fp, out=np.zeros(n_class), where=(tp + fp) > 0)
    recall = np.divide(tp, tp + fn, out=np.zeros(n_class), where=(tp + fn) > 0)
    pr = precision + recall
    f1 = np.divide(2 * precision * recall, pr, out=np.zeros(n_class), where=pr > 0)
    weighted_f1 = float(np.sum(support / total * f1))
    accuracy = float(tp.sum() / total)

    auc = None
    if n_class == 2 and len(np.unique(y)) == 2:
        auc = roc_auc(np.asarray(probabilities)[subset, 1], y)
    return EvalReport(
        accuracy=accuracy,
        precision=[float(v) for v in precision],
        recall=[float(v) for v in recall],
        f1=[float(v) for v in f1],
        support=[int(v) for v in support],
        weighted_f1=weighted_f1,
        confusion=confusion.tolist(),
        count=total,
        roc_auc=auc,
    )


def _check_binary(scores: np.ndarray, labels: np.ndarray, subset):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if subset is not None:
        subset = np.asarray(subset, dtype=np.intp)
        scores, labels = scores[subset], labels[subset]
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError("both classes must be present")
    return scores, labels, n_pos, n_neg


def roc_auc(scores: np.ndarray, labels: np.ndarray, subset=None) -> float:
    """Mann-Whitney AUC with average ranks for tied scores."""
    scores, labels, n_pos, n_neg = _check_binary(scores, labels, subset)
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size, dtype=np.float64)
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + 1 + j + 1) / 2.0  # average of 1-based ranks
        i = j + 1
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_points(scores: np.ndarray, labels: np.ndarray, subset=None) -> list[tuple[float, float, float]]:
    """ROC curve points (fpr, tpr, threshold) over the distinct score
    thresholds in descending order, prefixed with (0, 0, inf)."""
    scores, labels, n_pos, n_neg = _check_binary(scores, labels, subset)
    points = [(0.0, 0.0, float("inf"))]
    for thr in sorted(set(scores.tolist()), reverse=True):
        predicted_pos = scores >= thr
        tpr = float(np.sum(predicted_pos & (labels == 1))) / n_pos
        fpr = float(np.sum(predicted_pos & (labels == 0))) / n_neg
        points.append((fpr, tpr, float(thr)))
    return points
