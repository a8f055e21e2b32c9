"""Column kinds, vocabularies, and the encoded-matrix container."""
from __future__ import annotations

from dataclasses import dataclass, field
from os import PathLike
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from ..persist import register

KINDS = ("numerical", "categorical", "ordinal")
MISSING_TOKEN = "<missing>"


class SchemaError(ValueError):
    pass


@register
@dataclass
class ColumnSchema:
    name: str
    kind: str
    vocabulary: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"column {self.name!r}: unknown kind {self.kind!r}")

    @property
    def cardinality(self) -> int:
        return len(self.vocabulary)

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "vocabulary": list(self.vocabulary)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ColumnSchema":
        return cls(d["name"], d["kind"], {v: i for i, v in enumerate(d["vocabulary"])})


def as_category_strings(series: pd.Series) -> pd.Series:
    """Canonical string form used for vocabulary lookups."""
    out = series.astype(object).where(series.notna(), MISSING_TOKEN)
    return out.map(_to_str)


def _to_str(v) -> str:
    if isinstance(v, (float, np.floating)) and float(v).is_integer():
        return str(int(v))
    return str(v)


def _numeric_sort_key(values):
    try:
        return sorted(values, key=float)
    except ValueError:
        return sorted(values)


def infer_kind(series: pd.Series) -> str:
    observed = series.dropna()
    if pd.api.types.is_bool_dtype(series.dtype):
        return "categorical"
    if pd.api.types.is_numeric_dtype(series.dtype):
        return "numerical"
    parsed = pd.to_numeric(observed.astype(str).str.strip(), errors="coerce")
    return "numerical" if parsed.notna().all() else "categorical"


def fit_schema(table: pd.DataFrame, kinds: Mapping[str, str] | None = None,
               exclude: Sequence[str] = ("label",)) -> list[ColumnSchema]:
    """Infer a schema from training rows; ``kinds`` overrides inference per column."""
    if table.shape[0] == 0 or table.shape[1] == 0:
        raise SchemaError("cannot fit a schema on an empty table")
    kinds = dict(kinds or {})
    schema = []
    for name in table.columns:
        if name in exclude:
            continue
        col = table[name]
        if col.notna().sum() == 0:
            raise SchemaError(f"column {name!r} has no observed values")
        kind = kinds.get(name) or infer_kind(col)
        vocab: dict[str, int] = {}
        if kind == "categorical":
            vocab = {v: i for i, v in enumerate(sorted(set(as_category_strings(col))))}
        elif kind == "ordinal":
            vocab = {v: i for i, v in enumerate(_numeric_sort_key(set(as_category_strings(col))))}
        schema.append(ColumnSchema(str(name), kind, vocab))
    return schema


@dataclass
class EncodedMatrix:
    """Dense encoded features plus per-column provenance ``(source, encoder, id)``."""
    values: np.ndarray
    provenance: list[tuple[str, str, str]]
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.provenance):
            raise ValueError("provenance length must equal the number of columns")
        if not np.isfinite(self.values).all():
            raise ValueError("encoded matrix contains NaN or infinite entries")

    @property
    def shape(self):
        return self.values.shape

    def columns_from(self, source: str) -> list[int]:
        return [j for j, p in enumerate(self.provenance) if p[0] == source]

    def to_csv(self, path: str | PathLike) -> None:
        names = [f"f{j}" for j in range(self.values.shape[1])]
        frame = pd.DataFrame(self.values, columns=names)
        if self.labels is not None:
            frame["label"] = np.asarray(self.labels, dtype=np.int64)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for name, (src, kind, ident) in zip(names, self.provenance):
                fh.write(f"# {name}\t{src}\t{kind}\t{ident}\n")
            frame.to_csv(fh, index=False, float_format="%.17g", lineterminator="\n")

    @classmethod
    def from_csv(cls, path: str | PathLike) -> "EncodedMatrix":
        provenance = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.startswith("# "):
                    break
                _, src, kind, ident = line[2:].rstrip("\n").split("\t")
                provenance.append((src, kind, ident))
        frame = pd.read_csv(path, comment=None, skiprows=len(provenance))
        labels = frame.pop("label").to_numpy() if "label" in frame else None
        return cls(frame.to_numpy(dtype=np.float64), provenance, labels)
