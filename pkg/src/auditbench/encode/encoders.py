"""Table encoders with the scikit-learn transformer interface.

All encoders lay out categorical blocks first, then the standardized
numerical (and ordinal-rank) columns. Labels are never encoded.
"""
from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .schema import ColumnSchema, EncodedMatrix, SchemaError, as_category_strings, fit_schema


class _TableEncoder(TransformerMixin, BaseEstimator):
    kind_name = "table"

    def __init__(self, kinds: Mapping[str, str] | None = None, exclude: Sequence[str] = ("label",)):
        self.kinds = kinds
        self.exclude = exclude

    # -- fitting helpers
    def _fit_base(self, X: pd.DataFrame):
        if not isinstance(X, pd.DataFrame):
            raise TypeError("table encoders expect a pandas DataFrame")
        self.schema_ = fit_schema(X, self.kinds, tuple(self.exclude))
        cont = [c for c in self.schema_ if c.kind != "categorical"]
        raw = self._continuous_raw(X, cont)
        mean = np.nanmean(raw, axis=0) if raw.shape[1] else np.zeros(0)
        std = np.nanstd(raw, axis=0) if raw.shape[1] else np.zeros(0)
        self.num_mean_ = mean
        self.num_std_ = np.where(std > 0, std, 1.0)
        return self

    @property
    def categorical_(self) -> list[ColumnSchema]:
        return [c for c in self.schema_ if c.kind == "categorical"]

    @property
    def continuous_(self) -> list[ColumnSchema]:
        return [c for c in self.schema_ if c.kind != "categorical"]

    def _check_columns(self, X: pd.DataFrame):
        check_is_fitted(self, "schema_")
        missing = [c.name for c in self.schema_ if c.name not in X.columns]
        if missing:
            raise SchemaError(f"input lacks fitted column(s): {', '.join(missing)}")

    @staticmethod
    def _continuous_raw(X: pd.DataFrame, cols: list[ColumnSchema]) -> np.ndarray:
        out = np.empty((len(X), len(cols)))
        for j, c in enumerate(cols):
            if c.kind == "ordinal":
                keys = as_category_strings(X[c.name])
                out[:, j] = keys.map(c.vocabulary).fillna(len(c.vocabulary)).to_numpy(dtype=np.float64)
            else:
                out[:, j] = pd.to_numeric(X[c.name], errors="coerce").to_numpy(dtype=np.float64)
        return out

    def category_indices(self, X: pd.DataFrame) -> np.ndarray:
        """Vocabulary index per categorical column; unseen values map to ``len(vocab)``."""
        self._check_columns(X)
        cats = self.categorical_
        out = np.empty((len(X), len(cats)), dtype=np.int64)
        for j, c in enumerate(cats):
            keys = as_category_strings(X[c.name])
            out[:, j] = keys.map(c.vocabulary).fillna(c.cardinality).to_numpy(dtype=np.int64)
        return out

    def numeric_block(self, X: pd.DataFrame) -> np.ndarray:
        """Standardized continuous columns using training statistics."""
        self._check_columns(X)
        raw = self._continuous_raw(X, self.continuous_)
        raw = np.where(np.isnan(raw), self.num_mean_, raw)
        return (raw - self.num_mean_) / self.num_std_

    def _numeric_provenance(self):
        return [(c.name, "standardized", "") for c in self.continuous_]

    def fit(self, X, y=None):
        return self._fit_base(X)

    def get_feature_names_out(self, input_features=None):
        return np.asarray([f"{s}__{k}__{i}" if i != "" else f"{s}__{k}" for s, k, i in self.provenance_])

    @property
    def provenance_(self) -> list[tuple[str, str, str]]:
        raise NotImplementedError

    def encode(self, X: pd.DataFrame, labels=None) -> EncodedMatrix:
        return EncodedMatrix(self.transform(X), self.provenance_, labels)


class TableLabelEncoder(_TableEncoder):
    """One real column per categorical attribute holding its vocabulary index.

    >>> enc = TableLabelEncoder().fit(pd.DataFrame({"c": ["Red", "Blue", "Gelb"]}))
    >>> enc.transform(pd.DataFrame({"c": ["Red", "Green"]})).ravel().tolist()
    [2.0, 3.0]
    """
    kind_name = "label"

    def transform(self, X):
        return np.hstack([self.category_indices(X).astype(np.float64), self.numeric_block(X)])

    @property
    def provenance_(self):
        check_is_fitted(self, "schema_")
        return [(c.name, "label", "") for c in self.categorical_] + self._numeric_provenance()


class TableOneHotEncoder(_TableEncoder):
    """Indicator block per categorical attribute; unseen values give an all-zero block."""
    kind_name = "onehot"

    def transform(self, X):
        idx = self.category_indices(X)
        widths = [c.cardinality for c in self.categorical_]
        out = np.zeros((len(X), sum(widths)))
        rows = np.arange(len(X))
        offset = 0
        for j, w in enumerate(widths):
            seen = idx[:, j] < w
            out[rows[seen], offset + idx[seen, j]] = 1.0
            offset += w
        return np.hstack([out, self.numeric_block(X)])

    @property
    def provenance_(self):
        check_is_fitted(self, "schema_")
        prov = [(c.name, "onehot", v) for c in self.categorical_ for v in c.vocabulary]
        return prov + self._numeric_provenance()


def embedding_dims(schema: Sequence[ColumnSchema]) -> list[int]:
    """Embedding width per categorical column: ``min(50, ceil(n / 2))``, at least 1."""
    return [max(1, min(50, math.ceil(c.cardinality / 2))) for c in schema if c.kind == "categorical"]


def init_embedding_tables(cardinalities: Sequence[int], dims: Sequence[int], seed: int,
                          scale: float = 0.05) -> list[np.ndarray]:
    """Seeded uniform tables; each has one extra trailing row for unseen categories."""
    rng = np.random.default_rng(seed)
    return [rng.uniform(-scale, scale, size=(n + 1, d)) for n, d in zip(cardinalities, dims)]


def embed_concat(indices: np.ndarray, tables: Sequence[np.ndarray], numeric: np.ndarray) -> np.ndarray:
    """Look up each categorical index in its table and append the numeric block."""
    parts = [tables[j][indices[:, j]] for j in range(len(tables))]
    return np.hstack(parts + [numeric]) if parts else np.asarray(numeric, dtype=np.float64)


class EmbeddingEncoder(_TableEncoder):
    """Frozen random embedding tables (the representation used outside the autoencoder)."""
    kind_name = "embedding"

    def __init__(self, kinds=None, exclude=("label",), seed: int = 0, scale: float = 0.05):
        super().__init__(kinds, exclude)
        self.seed = seed
        self.scale = scale

    def fit(self, X, y=None):
        self._fit_base(X)
        self.dims_ = embedding_dims(self.schema_)
        self.tables_ = init_embedding_tables([c.cardinality for c in self.categorical_],
                                             self.dims_, self.seed, self.scale)
        return self

    def transform(self, X):
        check_is_fitted(self, "tables_")
        return embed_concat(self.category_indices(X), self.tables_, self.numeric_block(X))

    def index_matrix(self, X) -> np.ndarray:
        """Categorical indices followed by standardized numeric columns (autoencoder input)."""
        return np.hstack([self.category_indices(X).astype(np.float64), self.numeric_block(X)])

    @property
    def provenance_(self):
        check_is_fitted(self, "tables_")
        prov = [(c.name, "embedding", str(i)) for c, d in zip(self.categorical_, self.dims_) for i in range(d)]
        return prov + self._numeric_provenance()
