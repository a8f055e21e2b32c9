"""Pipeline configuration (a single JSON file plus command-line overrides)."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from os import PathLike
from typing import Any

from .evaluation.report import DEFAULT_TAU_GRID
from .evaluation.split import STRATEGIES

ENCODINGS = ("label", "onehot", "gel", "embedding")
DETECTORS = ("som", "iforest", "lof", "ae", "zscore")

# column kinds for generated Vehicle Claims tables
VC_KINDS = {
    "reg_year": "categorical",
    "door_num": "categorical",
    "issue_id": "categorical",
    "repair_complexity": "ordinal",
}


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    # either {"generate": {...}} or {"csv": path, "label_column": "label"}
    dataset: dict = field(default_factory=lambda: {"generate": {"n_rows": 10000}})
    encoding: str = "onehot"
    detector: str = "som"
    split: dict = field(default_factory=lambda: {"strategy": "stratified_70_30"})
    kinds: dict | None = None
    encoder_params: dict = field(default_factory=dict)
    detector_params: dict = field(default_factory=dict)
    zscore_column: str = "repair_cost"
    tau_grid: list = field(default_factory=lambda: list(DEFAULT_TAU_GRID))
    seed: int = 0
    matrix: bool = False

    def validate(self) -> "PipelineConfig":
        if self.encoding not in ENCODINGS:
            raise ConfigError(f"encoding must be one of {ENCODINGS}, got {self.encoding!r}")
        if self.detector not in DETECTORS:
            raise ConfigError(f"detector must be one of {DETECTORS}, got {self.detector!r}")
        if self.split.get("strategy", "stratified_70_30") not in STRATEGIES:
            raise ConfigError(f"split strategy must be one of {STRATEGIES}")
        if ("generate" in self.dataset) == ("csv" in self.dataset):
            raise ConfigError("dataset needs exactly one of 'generate' or 'csv'")
        if not self.tau_grid or any(not 0 < float(t) < 1 for t in self.tau_grid):
            raise ConfigError("tau_grid values must lie in (0, 1)")
        for key in ("encoder_params", "detector_params"):
            if not isinstance(getattr(self, key), dict):
                raise ConfigError(f"{key} must be a mapping")
        return self

    @property
    def column_kinds(self) -> dict:
        if self.kinds is not None:
            return dict(self.kinds)
        return dict(VC_KINDS) if "generate" in self.dataset else {}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PipelineConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        return cls(**d).validate()

    @classmethod
    def load(cls, path: str | PathLike) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)


def parse_tau_grid(text: str) -> list[float]:
    """``"0.05:0.30:0.01"`` (inclusive range) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            count = int(round((stop - start) / step)) + 1
            return [round(start + i * step, 10) for i in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad tau grid {text!r}") from exc
