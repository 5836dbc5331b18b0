"""File formats: prediction CSV, label CSV, run-config JSON, manifest JSON.

Prediction files carry one header row ``id,c0,...,c{C-1}`` and one row per
sample: an id (no commas) followed by C reals printed with 9 fixed
decimals.  Rounding preserves row sums (see :func:`_format_row`), so the
format round-trips below every tolerance used in this package.  All text
is UTF-8 with LF line endings, and writing is deterministic: identical
inputs produce identical bytes.
"""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass, field

import numpy as np

from .ensemble import SCORE_TYPES, EnsembleManifest, EnsembleMember
from .losses import LossConfig
from .numerics import check_prediction_matrix
from .schedule import (
    DEFAULT_BASE_LR,
    DEFAULT_MULTIPLIERS,
    DEFAULT_STEP_EPOCHS,
    FreezePolicy,
    StepDecaySchedule,
)
from .trainer import FeatureDataset, TrainConfig, synth_dataset

_UNIT = 10**9  # one printed decimal unit: 9 fixed decimals


def _format_row(row: np.ndarray) -> list[str]:
    # Sum-preserving rounding (largest remainder): each printed value stays
    # within one 1e-9 unit of the true value, and the printed row total is
    # the true total rounded to 9 decimals, so row-stochastic matrices stay
    # row-stochastic in file form.
    scaled = [v * _UNIT for v in row]
    base = [math.floor(u) for u in scaled]
    short = round(math.fsum(scaled)) - sum(base)
    by_remainder = sorted(range(len(base)), key=lambda j: (base[j] - scaled[j], j))
    bump = set(by_remainder[:short])
    cells = []
    for j, b in enumerate(base):
        units = b + (1 if j in bump else 0)
        sign = "-" if units < 0 else ""
        mag = abs(units)
        cells.append(f"{sign}{mag // _UNIT}.{mag % _UNIT:09d}")
    return cells


def _check_ids(ids: list[str]) -> None:
    seen = set()
    for sample_id in ids:
        if not sample_id or "," in sample_id:
            raise ValueError(f"sample id must be non-empty and comma-free, got {sample_id!r}")
        if sample_id in seen:
            raise ValueError(f"duplicate sample id {sample_id!r}")
        seen.add(sample_id)


def write_predictions(path: str, ids: list[str], matrix: np.ndarray) -> None:
    m = check_prediction_matrix(matrix)
    if len(ids) != m.shape[0]:
        raise ValueError(f"{len(ids)} ids for {m.shape[0]} rows")
    _check_ids(list(ids))
    header = "id," + ",".join(f"c{j}" for j in range(m.shape[1]))
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(header + "\n")
        for sample_id, row in zip(ids, m):
            handle.write(sample_id + "," + ",".join(_format_row(row)) + "\n")


def read_predictions(path: str) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        lines = handle.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ValueError(f"{path}:1: empty prediction file")
    header = lines[0].split(",")
    if header[0] != "id" or len(header) < 3 or any(
        name != f"c{j}" for j, name in enumerate(header[1:])
    ):
        raise ValueError(f"{path}:1: header must be 'id,c0,...,c{{C-1}}' with C >= 2")
    num_classes = len(header) - 1
    if len(lines) < 2:
        raise ValueError(f"{path}:1: prediction file has no data rows")
    ids: list[str] = []
    rows = np.empty((len(lines) - 1, num_classes))
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != num_classes + 1:
            raise ValueError(
                f"{path}:{lineno}: expected {num_classes + 1} columns, got {len(fields)}"
            )
        sample_id = fields[0]
        if not sample_id:
            raise ValueError(f"{path}:{lineno}: empty sample id")
        if sample_id in seen:
            raise ValueError(f"{path}:{lineno}: duplicate sample id {sample_id!r}")
        seen.add(sample_id)
        ids.append(sample_id)
        for j, text in enumerate(fields[1:]):
            try:
                value = float(text)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad number {text!r}") from None
            if not math.isfinite(value):
                raise ValueError(f"{path}:{lineno}: non-finite value {text!r}")
            rows[lineno - 2, j] = value
    return ids, rows


def write_labels(path: str, ids: list[str], labels: np.ndarray) -> None:
    y = np.asarray(labels, dtype=int)
    if len(ids) != y.shape[0]:
        raise ValueError(f"{len(ids)} ids for {y.shape[0]} labels")
    _check_ids(list(ids))
    if y.size and y.min() < 0:
        raise ValueError("labels must be non-negative")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("id,label\n")
        for sample_id, label in zip(ids, y):
            handle.write(f"{sample_id},{int(label)}\n")


def read_labels(path: str) -> tuple[list[str], list[int]]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        lines = handle.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != "id,label":
        raise ValueError(f"{path}:1: header must be 'id,label'")
    ids: list[str] = []
    labels: list[int] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(fields)}")
        sample_id, text = fields
        if not sample_id:
            raise ValueError(f"{path}:{lineno}: empty sample id")
        if sample_id in seen:
            raise ValueError(f"{path}:{lineno}: duplicate sample id {sample_id!r}")
        seen.add(sample_id)
        if not re.fullmatch(r"[+-]?\d+", text):
            raise ValueError(f"{path}:{lineno}: bad label {text!r}")
        label = int(text)
        if label < 0:
            raise ValueError(f"{path}:{lineno}: label must be >= 0, got {label}")
        ids.append(sample_id)
        labels.append(label)
    if not ids:
        raise ValueError(f"{path}:1: label file has no data rows")
    return ids, labels


@dataclass(frozen=True)
class DatasetSpec:
    """Synthetic-dataset parameters; the val split uses ``seed + 1`` (blob
    geometry is shared, only the sampling noise differs)."""

    n_train: int = 300
    n_val: int = 300
    dims: int = 8
    classes: int = 3
    separation: float = 6.0
    seed: int = 1


@dataclass(frozen=True)
class RunConfig:
    """One training run, as read from a JSON config file."""

    epochs: int = 10
    batch_size: int = 32
    base_lr: float = DEFAULT_BASE_LR
    steps: tuple[int, ...] = DEFAULT_STEP_EPOCHS
    mults: tuple[float, ...] = DEFAULT_MULTIPLIERS
    epsilon: float = 0.06
    gamma: float = 0.3
    loss_form: str = "per_class_sum"
    clamp_floor: float = 1e-12
    freeze: bool = False
    seed: int = 0
    hidden_dim: int = 32
    dataset: DatasetSpec = field(default_factory=DatasetSpec)

    def to_train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            schedule=StepDecaySchedule(self.base_lr, self.steps, self.mults),
            loss=LossConfig(
                epsilon=self.epsilon,
                gamma=self.gamma,
                form=self.loss_form,
                clamp_floor=self.clamp_floor,
            ),
            freeze=FreezePolicy.FROZEN if self.freeze else FreezePolicy.UNFROZEN,
            seed=self.seed,
            hidden_dim=self.hidden_dim,
        )

    def make_datasets(self) -> tuple[FeatureDataset, FeatureDataset]:
        spec = self.dataset
        train_set = synth_dataset(
            spec.seed, spec.n_train, spec.dims, spec.classes, spec.separation
        )
        val_set = synth_dataset(
            (spec.seed + 1) % 2**64, spec.n_val, spec.dims, spec.classes, spec.separation
        )
        return train_set, val_set


_DATASET_KEYS = {"n_train", "n_val", "dims", "classes", "separation", "seed"}
_CONFIG_KEYS = {
    "epochs",
    "batch_size",
    "base_lr",
    "steps",
    "mults",
    "epsilon",
    "gamma",
    "loss_form",
    "clamp_floor",
    "freeze",
    "seed",
    "hidden_dim",
    "dataset",
}


def load_run_config(path: str) -> RunConfig:
    """Parse and validate a run config; raises ValueError naming the violated
    invariant on any bad value."""
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: run config must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    dataset_data = data.pop("dataset", {})
    if not isinstance(dataset_data, dict):
        raise ValueError(f"{path}: 'dataset' must be a JSON object")
    unknown = set(dataset_data) - _DATASET_KEYS
    if unknown:
        raise ValueError(f"{path}: unknown dataset keys {sorted(unknown)}")
    if "steps" in data:
        data["steps"] = tuple(data["steps"])
    if "mults" in data:
        data["mults"] = tuple(data["mults"])
    config = RunConfig(dataset=DatasetSpec(**dataset_data), **data)
    config.to_train_config()  # surfaces invariant violations at load time
    if config.dataset.n_train < config.dataset.classes or config.dataset.n_val < config.dataset.classes:
        raise ValueError("dataset splits need at least one sample per class")
    return config


def load_manifest(path: str) -> EnsembleManifest:
    """Parse a fusion manifest; relative member paths resolve against the
    manifest file's directory."""
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: manifest must be a JSON object")
    unknown = set(data) - {"members", "score_type"}
    if unknown:
        raise ValueError(f"{path}: unknown manifest keys {sorted(unknown)}")
    members_data = data.get("members")
    if not isinstance(members_data, list):
        raise ValueError(f"{path}: manifest 'members' must be a list")
    base = os.path.dirname(os.path.abspath(path))
    members = []
    for entry in members_data:
        if not isinstance(entry, dict) or set(entry) != {"path", "weight"}:
            raise ValueError(f"{path}: each member must be an object with 'path' and 'weight'")
        member_path = str(entry["path"])
        if not os.path.isabs(member_path):
            member_path = os.path.join(base, member_path)
        members.append(EnsembleMember(path=member_path, weight=float(entry["weight"])))
    return EnsembleManifest(members=tuple(members), score_type=data.get("score_type", "prob"))


def write_manifest(path: str, member_paths: list[str], weights: list[float], score_type: str) -> None:
    """Write a manifest; member paths are stored relative to the manifest's
    directory when possible so the file is relocatable."""
    if score_type not in SCORE_TYPES:
        raise ValueError(f"score_type must be one of {SCORE_TYPES}, got {score_type!r}")
    base = os.path.dirname(os.path.abspath(path))
    members = []
    for member_path, weight in zip(member_paths, weights):
        try:
            stored = os.path.relpath(os.path.abspath(member_path), base)
        except ValueError:
            stored = os.path.abspath(member_path)
        members.append({"path": stored, "weight": float(weight)})
    document = {"members": members, "score_type": score_type}
    with open(path, "w", encoding="utf-8", newline="") as handle:
        json.dump(document, handle, indent=2)
        handle.write("\n")
