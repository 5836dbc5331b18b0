"""Weighted fusion of prediction matrices and a simplex grid search over
fusion weights.

Fusion runs in probability space: logit-typed inputs are pushed through a
row-wise softmax first, and the mix is the arithmetic weighted mean, so the
output of valid inputs is again a row-stochastic matrix without any
renormalization.  Element sums use exactly rounded accumulation
(``math.fsum``), which makes fusion order-independent: permuting members
and weights together reproduces the same bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .metrics import (
    mean_auc,
    mean_average_precision,
    mean_class_accuracy,
    topk_accuracy,
)
from .numerics import check_labels, check_prediction_matrix, softmax

SCORE_TYPES = ("prob", "logit")
WEIGHT_SUM_TOL = 1e-9
PROB_ROW_TOL = 1e-6
MAX_GRID_POINTS = 1_000_000
MAX_SWEEP_MEMBERS = 5

OBJECTIVES = ("top1", "top5", "mca", "map", "mauc")


@dataclass(frozen=True)
class EnsembleMember:
    path: str
    weight: float


@dataclass(frozen=True)
class EnsembleManifest:
    """Ordered prediction sources with fusion weights summing to 1."""

    members: tuple[EnsembleMember, ...]
    score_type: str = "prob"

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        if len(self.members) < 2:
            raise ValueError(f"manifest needs >= 2 members, got {len(self.members)}")
        _check_weights([m.weight for m in self.members])
        if self.score_type not in SCORE_TYPES:
            raise ValueError(f"score_type must be one of {SCORE_TYPES}, got {self.score_type!r}")

    def paths(self) -> list[str]:
        return [m.path for m in self.members]

    def weights(self) -> np.ndarray:
        return np.array([m.weight for m in self.members], dtype=float)


def _check_weights(weights: Sequence[float]) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise ValueError("weights must be a non-empty vector")
    if not np.all(np.isfinite(w)) or np.any(w < 0.0):
        raise ValueError("weights must be finite and non-negative")
    total = float(w.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weights must sum to 1 within {WEIGHT_SUM_TOL}, got {total!r}")
    return w


def _check_members(preds: Sequence[np.ndarray], score_type: str) -> list[np.ndarray]:
    if score_type not in SCORE_TYPES:
        raise ValueError(f"score_type must be one of {SCORE_TYPES}, got {score_type!r}")
    mats = [check_prediction_matrix(p) for p in preds]
    if not mats:
        raise ValueError("at least one prediction matrix is required")
    shape = mats[0].shape
    for k, m in enumerate(mats):
        if m.shape != shape:
            raise ValueError(f"member {k} has shape {m.shape}, expected {shape}")
    if score_type == "logit":
        mats = [np.stack([softmax(row) for row in m]) for m in mats]
    else:
        for k, m in enumerate(mats):
            if np.any(np.abs(m.sum(axis=1) - 1.0) > PROB_ROW_TOL):
                raise ValueError(f"member {k} rows must sum to 1 (score_type=prob)")
    return mats


def fuse(
    preds: Sequence[np.ndarray], weights: Sequence[float], score_type: str = "prob"
) -> np.ndarray:
    """Convex combination of prediction matrices: row i of the output is
    ``sum_k weights[k] * preds[k][i]``."""
    mats = _check_members(preds, score_type)
    w = _check_weights(weights)
    if w.size != len(mats):
        raise ValueError(f"{len(mats)} members but {w.size} weights")
    if all(np.array_equal(m, mats[0]) for m in mats[1:]):
        # Convexity fixed point, honored exactly rather than up to rounding.
        return mats[0].copy()
    products = [wk * m for wk, m in zip(w, mats)]
    out = np.empty_like(mats[0])
    rows, cols = out.shape
    for i in range(rows):
        for j in range(cols):
            out[i, j] = math.fsum(p[i, j] for p in products)
    return out


def _objective_fn(objective: str, num_classes: int):
    if objective == "top1":
        return lambda preds, labels: topk_accuracy(preds, labels, 1)
    if objective == "top5":
        return lambda preds, labels: topk_accuracy(preds, labels, min(5, num_classes))
    if objective == "mca":
        return mean_class_accuracy
    if objective == "map":
        return mean_average_precision
    if objective == "mauc":
        return mean_auc
    raise ValueError(f"objective must be one of {OBJECTIVES}, got {objective!r}")


def _compositions(total: int, parts: int):
    # Ascending lexicographic order, so that on ties the first (lex
    # smallest) weight vector wins.
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def sweep_weights(
    preds: Sequence[np.ndarray],
    labels: np.ndarray,
    resolution: int,
    objective: str = "top1",
    score_type: str = "prob",
) -> tuple[np.ndarray, float]:
    """Exhaustive search over the weight simplex grid ``{k / resolution}``.

    Returns the best (weights, score); ties resolve to the lexicographically
    smallest weight vector.  The grid contains every unit vector, so the
    returned score is >= every single member's score.
    """
    mats = _check_members(preds, score_type)
    m = len(mats)
    if m < 2:
        raise ValueError(f"sweep needs >= 2 members, got {m}")
    if m > MAX_SWEEP_MEMBERS:
        raise ValueError(f"sweep supports at most {MAX_SWEEP_MEMBERS} members, got {m}")
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")
    num_points = math.comb(resolution + m - 1, m - 1)
    if num_points > MAX_GRID_POINTS:
        raise ValueError(
            f"weight grid has {num_points} points, over the {MAX_GRID_POINTS} limit"
        )
    n, num_classes = mats[0].shape
    y = check_labels(labels, n, num_classes)
    score_fn = _objective_fn(objective, num_classes)
    best_weights = None
    best_score = -math.inf
    for comp in _compositions(resolution, m):
        w = np.array(comp, dtype=float) / resolution
        score = score_fn(fuse(mats, w), y)
        if score > best_score:
            best_score = score
            best_weights = w
    return best_weights, best_score
