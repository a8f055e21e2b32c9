"""Splitting strategies and threshold-based evaluation."""
from .metrics import ConfusionCounts, auc, flag_top, n_flagged, threshold_at, weighted_f1
from .report import DEFAULT_TAU_GRID, EvalReport, SweepRow, sweep
from .split import STRATEGIES, Split, SplitSpec, split

__all__ = [
    "ConfusionCounts", "auc", "flag_top", "n_flagged", "threshold_at", "weighted_f1",
    "DEFAULT_TAU_GRID", "EvalReport", "SweepRow", "sweep", "STRATEGIES", "Split", "SplitSpec", "split",
]
