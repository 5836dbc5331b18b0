"""Cross-entropy loss family: plain, label-smoothed, and focal-modulated.

Every loss is evaluated on one sample: a probability vector ``p`` over C
classes and the true class index ``c``.  Writing ``w_c = 1 - eps`` for the
target weight, the general per-sample loss is

    target term:      -(1 - p_c)^gamma * w_c * log(p_c)
    off-target terms: -(p_i)^gamma * w_i * log(1 - p_i)    for i != c

where ``w_i`` is ``eps / (C - 1)`` when smoothing is on (``eps > 0``) and 1
when it is off.  The unsmoothed form deliberately keeps unit weight on the
off-target terms rather than taking the ``eps -> 0`` limit, which would
drop them; ``eps = 0, gamma = 0`` therefore reproduces the plain per-class
cross entropy ``-log(p_c) - sum(log(1 - p_i))``.

Two reductions are provided: ``per_class_sum`` (all terms above) and
``target_only`` (just the target term, i.e. categorical cross entropy when
``eps = gamma = 0``).  Gradients with respect to pre-softmax logits are
hand-derived; there is no autodiff here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import check_probability_vector, softmax

LOSS_FORMS = ("per_class_sum", "target_only")


@dataclass(frozen=True)
class LossConfig:
    """Hyperparameters selecting one member of the loss family.

    epsilon      label-smoothing mass moved off the target class, in [0, 1)
    gamma        focal exponent, >= 0 (0 disables focal modulation)
    form         "per_class_sum" or "target_only"
    clamp_floor  probabilities are clamped to [floor, 1 - floor] before logs
    """

    epsilon: float = 0.0
    gamma: float = 0.0
    form: str = "per_class_sum"
    clamp_floor: float = 1e-12

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and 0.0 <= self.epsilon < 1.0):
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0.0):
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.form not in LOSS_FORMS:
            raise ValueError(f"form must be one of {LOSS_FORMS}, got {self.form!r}")
        if not 0.0 < self.clamp_floor <= 1e-6:
            raise ValueError(f"clamp_floor must be in (0, 1e-6], got {self.clamp_floor}")


def smooth_labels(true_class: int, num_classes: int, epsilon: float) -> np.ndarray:
    """Smoothed target distribution: 1 - eps on the true class, eps/(C-1) elsewhere.

    ``epsilon = 0`` gives the one-hot vector.
    """
    if num_classes < 2:
        raise ValueError(f"num_classes must be >= 2, got {num_classes}")
    if not (math.isfinite(epsilon) and 0.0 <= epsilon < 1.0):
        raise ValueError(f"epsilon must be in [0, 1), got {epsilon}")
    if not 0 <= true_class < num_classes:
        raise IndexError(f"true_class {true_class} out of range for {num_classes} classes")
    out = np.full(num_classes, epsilon / (num_classes - 1), dtype=float)
    out[true_class] = 1.0 - epsilon
    return out


def _off_target_weight(epsilon: float, num_classes: int) -> float:
    # eps == 0 keeps unit weight on the off-target terms (the unsmoothed
    # form); smoothing replaces it with the smoothed off-target mass.
    return epsilon / (num_classes - 1) if epsilon > 0.0 else 1.0


def loss_value(p: np.ndarray, true_class: int, config: LossConfig) -> float:
    """Per-sample loss for probability vector ``p`` and true class ``c``."""
    q = check_probability_vector(p)
    num_classes = q.size
    if not 0 <= true_class < num_classes:
        raise IndexError(f"true_class {true_class} out of range for {num_classes} classes")
    floor = config.clamp_floor
    q = np.clip(q, floor, 1.0 - floor)
    eps, gamma = config.epsilon, config.gamma

    qc = float(q[true_class])
    value = -((1.0 - qc) ** gamma) * (1.0 - eps) * math.log(qc)
    if config.form == "per_class_sum":
        off_w = _off_target_weight(eps, num_classes)
        for i in range(num_classes):
            if i == true_class:
                continue
            qi = float(q[i])
            value -= (qi**gamma) * off_w * math.log1p(-qi)
    return value


def loss_grad(logits: np.ndarray, true_class: int, config: LossConfig) -> np.ndarray:
    """Gradient of ``loss_value(softmax(logits), c)`` with respect to the logits.

    For ``eps = 0, gamma = 0, target_only`` this is the classical
    ``softmax(logits) - onehot(c)``.
    """
    p = softmax(logits)
    num_classes = p.size
    if not 0 <= true_class < num_classes:
        raise IndexError(f"true_class {true_class} out of range for {num_classes} classes")
    floor = config.clamp_floor
    q = np.clip(p, floor, 1.0 - floor)
    eps, gamma = config.epsilon, config.gamma

    # dL/dp, term by term.  The gamma > 0 guards avoid 0 * inf at the
    # clamp boundaries when the focal factor is off.
    dldp = np.zeros(num_classes)
    qc = float(q[true_class])
    d_target = -(1.0 - eps) * ((1.0 - qc) ** gamma) / qc
    if gamma > 0.0:
        d_target += (1.0 - eps) * gamma * ((1.0 - qc) ** (gamma - 1.0)) * math.log(qc)
    dldp[true_class] = d_target
    if config.form == "per_class_sum":
        off_w = _off_target_weight(eps, num_classes)
        for i in range(num_classes):
            if i == true_class:
                continue
            qi = float(q[i])
            d_i = off_w * (qi**gamma) / (1.0 - qi)
            if gamma > 0.0:
                d_i -= off_w * gamma * (qi ** (gamma - 1.0)) * math.log1p(-qi)
            dldp[i] = d_i

    # Chain through the softmax Jacobian: dL/dz_j = p_j * (d_j - <d, p>).
    return p * (dldp - float(np.dot(dldp, p)))
