"""Ranking metrics for multi-class predictions: top-k accuracy, mean
per-class accuracy, mean average precision, and mean ROC AUC.

Conventions (fixed so results are bit-stable and oracle-testable):

* Averaging over classes is macro (unweighted); a class is excluded from
  mCA/mAP when it has no samples/positives, and from mAUC when it lacks
  either positives or negatives.
* Ties always break toward the lower index: lower class index when ranking
  the classes of one sample, lower sample index when sorting samples by a
  class's score.
* AP is the mean of precision at each positive rank; AUC is the pairwise
  statistic (wins + 0.5 * ties) / (positives * negatives).
* All values are fractions in [0, 1]; the display layer shows percentages
  except for mAUC, which stays a 3-decimal fraction.

Per-class means are accumulated in ascending class/rank order with plain
sequential summation, so small instances match a brute-force oracle
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import check_labels, check_prediction_matrix


@dataclass(frozen=True)
class MetricReport:
    """The five evaluation metrics for one prediction set."""

    top1: float
    top5: float
    mca: float
    map: float
    mauc: float

    def as_dict(self) -> dict[str, float]:
        return {
            "top1": self.top1,
            "top5": self.top5,
            "mca": self.mca,
            "map": self.map,
            "mauc": self.mauc,
        }

    def summary_row(self) -> str:
        """One-line summary, percentages except mAUC: ``55.07 / 85.61 / 20.95 / 26.20 / 0.859``."""
        return (
            f"{self.top1 * 100:.2f} / {self.top5 * 100:.2f} / {self.mca * 100:.2f}"
            f" / {self.map * 100:.2f} / {self.mauc:.3f}"
        )

    def table(self) -> str:
        rows = [
            ("top1", f"{self.top1 * 100:.2f}"),
            ("top5", f"{self.top5 * 100:.2f}"),
            ("mca", f"{self.mca * 100:.2f}"),
            ("map", f"{self.map * 100:.2f}"),
            ("mauc", f"{self.mauc:.3f}"),
        ]
        return "\n".join(f"{name:<5} {value:>7}" for name, value in rows)


def topk_accuracy(preds: np.ndarray, labels: np.ndarray, k: int) -> float:
    """Fraction of rows whose true class ranks among the k highest scores.

    A row's rank of class c counts classes with strictly greater score plus
    tied classes with lower index.
    """
    scores = check_prediction_matrix(preds)
    n, num_classes = scores.shape
    y = check_labels(labels, n, num_classes)
    if not 1 <= k <= num_classes:
        raise ValueError(f"k must be in [1, {num_classes}], got {k}")
    hits = 0
    for i in range(n):
        row = scores[i]
        target_score = row[y[i]]
        rank = int(np.count_nonzero(row > target_score))
        rank += int(np.count_nonzero(row[: y[i]] == target_score))
        if rank < k:
            hits += 1
    return hits / n


def mean_class_accuracy(preds: np.ndarray, labels: np.ndarray) -> float:
    """Unweighted mean over classes (with >= 1 sample) of per-class top-1 recall."""
    scores = check_prediction_matrix(preds)
    n, num_classes = scores.shape
    y = check_labels(labels, n, num_classes)
    top1 = np.argmax(scores, axis=1)  # first max, so ties go to the lower class
    recalls = []
    for c in range(num_classes):
        members = y == c
        total = int(np.count_nonzero(members))
        if total == 0:
            continue
        correct = int(np.count_nonzero(top1[members] == c))
        recalls.append(correct / total)
    return sum(recalls) / len(recalls)


def _ranked_sample_order(scores: np.ndarray) -> np.ndarray:
    # Descending by score; ties keep the lower sample index first.
    return np.argsort(-scores, kind="stable")


def mean_average_precision(preds: np.ndarray, labels: np.ndarray) -> float:
    """Macro one-vs-rest AP: mean precision at each positive rank, averaged
    over classes with at least one positive."""
    scores = check_prediction_matrix(preds)
    n, num_classes = scores.shape
    y = check_labels(labels, n, num_classes)
    aps = []
    for c in range(num_classes):
        positives = y == c
        num_pos = int(np.count_nonzero(positives))
        if num_pos == 0:
            continue
        order = _ranked_sample_order(scores[:, c])
        found = 0
        precisions = []
        for rank, sample in enumerate(order, start=1):
            if positives[sample]:
                found += 1
                precisions.append(found / rank)
        aps.append(sum(precisions) / num_pos)
    if not aps:
        raise ValueError("mean_average_precision needs at least one positive label")
    return sum(aps) / len(aps)


def mean_auc(preds: np.ndarray, labels: np.ndarray) -> float:
    """Macro one-vs-rest ROC AUC via the pairwise win/tie count, averaged
    over classes that have both positives and negatives."""
    scores = check_prediction_matrix(preds)
    n, num_classes = scores.shape
    y = check_labels(labels, n, num_classes)
    aucs = []
    for c in range(num_classes):
        positives = y == c
        pos = scores[positives, c]
        neg = scores[~positives, c]
        if pos.size == 0 or neg.size == 0:
            continue
        wins = int(np.count_nonzero(pos[:, None] > neg[None, :]))
        ties = int(np.count_nonzero(pos[:, None] == neg[None, :]))
        aucs.append((wins + 0.5 * ties) / (pos.size * neg.size))
    if not aucs:
        raise ValueError("mean_auc needs a class with both positives and negatives")
    return sum(aucs) / len(aucs)


def full_report(preds: np.ndarray, labels: np.ndarray) -> MetricReport:
    """All five metrics; top-5 uses k = min(5, C)."""
    scores = check_prediction_matrix(preds)
    num_classes = scores.shape[1]
    return MetricReport(
        top1=topk_accuracy(scores, labels, 1),
        top5=topk_accuracy(scores, labels, min(5, num_classes)),
        mca=mean_class_accuracy(scores, labels),
        map=mean_average_precision(scores, labels),
        mauc=mean_auc(scores, labels),
    )
