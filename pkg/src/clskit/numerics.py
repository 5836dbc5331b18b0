"""Numeric substrate: stable softmax, seeded random streams, validation.

Vectors and matrices are plain ``numpy`` float64 arrays.  All randomness in
the package flows through :func:`make_rng`, which wraps numpy's default
PCG64 bit generator: a given integer key reproduces the same stream on
every run.  Independent streams are derived by keying the generator with
tuples (e.g. ``(seed, epoch)``), never by sharing one generator.
"""

from __future__ import annotations

import numpy as np

# Tolerance for "entries sum to 1" checks on probability vectors.
PROB_SUM_TOL = 1e-9

_MAX_SEED = 2**64


def make_rng(*key: int) -> np.random.Generator:
    """Return a deterministic generator for an integer key.

    Distinct key tuples give distinct streams, so e.g. ``make_rng(seed)``
    and ``make_rng(seed, 0)`` never collide.  The key length is mixed in
    because numpy's seed sequence ignores trailing zero words.
    """
    if not key:
        raise ValueError("make_rng requires at least one key part")
    for part in key:
        if not isinstance(part, (int, np.integer)) or isinstance(part, bool):
            raise ValueError(f"seed key parts must be integers, got {part!r}")
        if not 0 <= int(part) < _MAX_SEED:
            raise ValueError(f"seed key parts must be in [0, 2**64), got {part}")
    return np.random.default_rng([len(key), *(int(part) for part in key)])


def gaussian_sample(seed: int, n: int) -> np.ndarray:
    """Draw ``n`` standard-normal values, fully determined by ``seed``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return make_rng(seed).standard_normal(n)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Map a logit vector to a probability vector.

    Uses max-subtraction so arbitrarily large finite logits cannot
    overflow; the result sums to 1 within 1e-12.
    """
    z = np.asarray(logits, dtype=float)
    if z.ndim != 1 or z.size < 2:
        raise ValueError("logits must be a 1-D vector with at least 2 entries")
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    shifted = z - z.max()
    e = np.exp(shifted)
    return e / e.sum()


def check_probability_vector(p: np.ndarray, tol: float = PROB_SUM_TOL) -> np.ndarray:
    """Validate a probability vector (entries in [0, 1], sums to 1)."""
    v = np.asarray(p, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("probability vector must be 1-D with at least 2 entries")
    if not np.all(np.isfinite(v)):
        raise ValueError("probability vector must be finite")
    if np.any(v < 0.0) or np.any(v > 1.0):
        raise ValueError("probability vector entries must lie in [0, 1]")
    total = float(v.sum())
    if abs(total - 1.0) > tol:
        raise ValueError(f"probability vector must sum to 1 (got {total!r})")
    return v


def check_prediction_matrix(scores: np.ndarray) -> np.ndarray:
    """Validate an n-by-C score matrix (finite, n >= 1, C >= 2)."""
    m = np.asarray(scores, dtype=float)
    if m.ndim != 2:
        raise ValueError("prediction matrix must be 2-D")
    n, num_classes = m.shape
    if n < 1:
        raise ValueError("prediction matrix must have at least one row")
    if num_classes < 2:
        raise ValueError("prediction matrix must have at least 2 class columns")
    if not np.all(np.isfinite(m)):
        raise ValueError("prediction matrix entries must be finite")
    return m


def check_labels(labels: np.ndarray, n: int, num_classes: int) -> np.ndarray:
    """Validate a label vector against a prediction matrix's shape."""
    y = np.asarray(labels)
    if y.ndim != 1 or y.size != n:
        raise ValueError(f"labels must be a vector of length {n}")
    if not np.issubdtype(y.dtype, np.integer):
        if not np.all(y == y.astype(int)):
            raise ValueError("labels must be integers")
        y = y.astype(int)
    y = y.astype(int)
    if y.size and (y.min() < 0 or y.max() >= num_classes):
        raise ValueError(f"labels must lie in [0, {num_classes})")
    return y
