"""AUC, top-fraction thresholding and weighted F1."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


def auc(scores, labels) -> float:
    """Rank (Mann-Whitney) AUC with midranks; ties between classes count one half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes")
    ranks = rankdata(scores, method="average")
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def n_flagged(n: int, tau: float) -> int:
    # rounding guards against tau * n landing a hair above an integer
    return min(n, int(math.ceil(round(tau * n, 9))))


def flag_top(scores, tau: float) -> np.ndarray:
    """Boolean mask of the ``ceil(tau * n)`` highest scores; ties go to earlier rows."""
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    scores = np.asarray(scores, dtype=np.float64)
    order = np.argsort(-scores, kind="stable")
    mask = np.zeros(len(scores), dtype=bool)
    mask[order[:n_flagged(len(scores), tau)]] = True
    return mask


def threshold_at(scores, tau: float) -> float:
    """Score of the lowest flagged row under :func:`flag_top`."""
    scores = np.asarray(scores, dtype=np.float64)
    mask = flag_top(scores, tau)
    return float(scores[mask].min()) if mask.any() else float("inf")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @classmethod
    def from_predictions(cls, labels, predictions) -> "ConfusionCounts":
        y = np.asarray(labels).astype(bool)
        p = np.asarray(predictions).astype(bool)
        return cls(int((y & p).sum()), int((~y & p).sum()), int((~y & ~p).sum()), int((y & ~p).sum()))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _f1(tp: int, fp: int, fn: int) -> float:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return 2 * precision * recall / (precision + recall) if precision + recall else 0.0


def weighted_f1(counts: ConfusionCounts) -> float:
    """Per-class F1 averaged with weights equal to each class's true support."""
    pos_support = counts.tp + counts.fn
    neg_support = counts.tn + counts.fp
    total = pos_support + neg_support
    if total == 0:
        return 0.0
    f_pos = _f1(counts.tp, counts.fp, counts.fn)
    f_neg = _f1(counts.tn, counts.fn, counts.fp)
    return (pos_support * f_pos + neg_support * f_neg) / total
