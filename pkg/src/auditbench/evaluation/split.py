"""Train/test splitting strategies for contaminated and clean training."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STRATEGIES = ("stratified_70_30", "recycling", "discarding")


@dataclass
class SplitSpec:
    strategy: str = "stratified_70_30"
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown split strategy {self.strategy!r}; expected one of {STRATEGIES}")


@dataclass
class Split:
    train: np.ndarray
    test: np.ndarray
    metadata: dict = field(default_factory=dict)


def _half(n: int, fraction: float) -> int:
    return int(np.floor(fraction * n + 0.5))


def split(labels, spec: SplitSpec) -> Split:
    """Return train/test row indices (sorted) for the given labels."""
    labels = np.asarray(labels).astype(np.int64)
    n = len(labels)
    anomalies = np.flatnonzero(labels == 1)
    normals = np.flatnonzero(labels == 0)
    if n < 10:
        raise ValueError("need at least 10 rows to split")
    if len(anomalies) < 2:
        raise ValueError("need at least 2 anomalies to split")
    rng = np.random.default_rng(spec.seed)
    dropped = np.array([], dtype=np.int64)

    if spec.strategy == "stratified_70_30":
        parts_train, parts_test = [], []
        for cls_rows in (normals, anomalies):
            shuffled = rng.permutation(cls_rows)
            k = _half(len(cls_rows), 0.7)
            parts_train.append(shuffled[:k])
            parts_test.append(shuffled[k:])
        train, test = np.concatenate(parts_train), np.concatenate(parts_test)
    elif spec.strategy == "recycling":
        shuffled = rng.permutation(normals)
        k = _half(len(normals), 0.5)
        train = shuffled[:k]
        test = np.concatenate([shuffled[k:], anomalies])
    else:
        shuffled = rng.permutation(n)
        k = _half(n, 0.5)
        train, test = shuffled[:k], shuffled[k:]
        dropped = train[labels[train] == 1]
        train = train[labels[train] == 0]

    train, test = np.sort(train), np.sort(test)
    meta = {
        "strategy": spec.strategy,
        "seed": spec.seed,
        "n_train": int(len(train)),
        "n_test": int(len(test)),
        "train_anomalies": int(labels[train].sum()),
        "test_anomalies": int(labels[test].sum()),
        "test_anomaly_ratio": float(labels[test].mean()) if len(test) else 0.0,
        "dropped_anomalies": int(len(dropped)),
    }
    return Split(train, test, meta)
