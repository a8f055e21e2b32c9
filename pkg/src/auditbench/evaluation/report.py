from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from os import PathLike

import numpy as np

from .metrics import ConfusionCounts, auc, flag_top, threshold_at, weighted_f1

DEFAULT_TAU_GRID = tuple(round(0.05 + 0.01 * i, 2) for i in range(26))


@dataclass
class SweepRow:
    tau: float
    threshold: float
    counts: ConfusionCounts
    weighted_f1: float

    @property
    def n_flagged(self) -> int:
        return self.counts.tp + self.counts.fp


@dataclass
class EvalReport:
    auc: float
    sweep: list[SweepRow]
    split: dict = field(default_factory=dict)
    detector: str = ""
    encoding: str = ""

    def to_dict(self) -> dict:
        return {
            "auc": self.auc,
            "detector": self.detector,
            "encoding": self.encoding,
            "split": self.split,
            "sweep": [{"tau": r.tau, "threshold": r.threshold, **asdict(r.counts),
                       "weighted_f1": r.weighted_f1} for r in self.sweep],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        rows = [SweepRow(r["tau"], r["threshold"], ConfusionCounts(r["tp"], r["fp"], r["tn"], r["fn"]),
                         r["weighted_f1"]) for r in d["sweep"]]
        return cls(d["auc"], rows, d.get("split", {}), d.get("detector", ""), d.get("encoding", ""))

    def to_json(self, path: str | PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def to_csv(self, path: str | PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# auc={self.auc:.10f}\n")
            fh.write("tau,threshold,tp,fp,tn,fn,weighted_f1\n")
            for r in self.sweep:
                c = r.counts
                fh.write(f"{r.tau:.2f},{r.threshold:.10g},{c.tp},{c.fp},{c.tn},{c.fn},{r.weighted_f1:.10f}\n")

    def to_plot_text(self, path: str | PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for r in self.sweep:
                fh.write(f"{r.tau:.2f} {r.weighted_f1:.6f}\n")


def sweep(scores, labels, tau_grid=DEFAULT_TAU_GRID, **meta) -> EvalReport:
    """AUC plus weighted F1 when the top ``tau`` fraction is flagged, for each ``tau``."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    rows = []
    for tau in tau_grid:
        flags = flag_top(scores, tau)
        counts = ConfusionCounts.from_predictions(labels, flags)
        rows.append(SweepRow(float(tau), threshold_at(scores, tau), counts, weighted_f1(counts)))
    return EvalReport(auc(scores, labels), rows, **meta)
