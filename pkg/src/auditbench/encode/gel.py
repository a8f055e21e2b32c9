"""Generalized feature embedding learning (GEL) on a binarized table.

Given a binary matrix ``W`` (n x m_w), the instance marginals ``R`` (n x 2) and
feature marginals ``F`` (m_w x 2) hold the fraction of zeros and ones per row
and per column. With ``Q = F R^T`` the learned projection is the leading right
singular vectors of ``S = Q^T Q W`` and the embedding of new rows is ``W V_k``.

``Q^T Q = R (F^T F) R^T`` so ``S`` is never formed densely and has rank <= 2;
the singular vectors are obtained from a 2 x m_w factor.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..persist import register
from .encoders import _TableEncoder
from .schema import ColumnSchema, SchemaError, as_category_strings

log = logging.getLogger(__name__)


def marginals(W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row marginals ``R`` (n x 2) and column marginals ``F`` (m_w x 2)."""
    W = np.asarray(W, dtype=np.float64)
    n, m = W.shape
    r0 = (1.0 - W).sum(axis=1) / m
    f0 = (1.0 - W).sum(axis=0) / n
    return np.column_stack([r0, 1.0 - r0]), np.column_stack([f0, 1.0 - f0])


def canonical_signs(V: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    if V.size == 0:
        return V
    pivot = np.abs(V).argmax(axis=0)
    signs = np.sign(V[pivot, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


@register
@dataclass
class GelModel:
    components: np.ndarray          # m_w x k, orthonormal columns
    singular_values: np.ndarray     # descending, length min(n, m_w)
    binarizer: dict | None = field(default=None)

    @property
    def k(self) -> int:
        return self.components.shape[1]

    @property
    def n_binary_features(self) -> int:
        return self.components.shape[0]

    def to_dict(self) -> dict:
        return {"components": self.components, "singular_values": self.singular_values,
                "binarizer": self.binarizer}

    @classmethod
    def from_dict(cls, d: Mapping) -> "GelModel":
        return cls(np.asarray(d["components"]), np.asarray(d["singular_values"]), d.get("binarizer"))


def gel_fit(W, k: int) -> GelModel:
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2:
        raise ValueError("W must be a 2-D matrix")
    n, m = W.shape
    if n < 2:
        raise ValueError("GEL needs at least two rows")
    if not 1 <= k <= m:
        raise ValueError(f"k must lie in [1, {m}], got {k}")
    if not np.isin(W, (0.0, 1.0)).all():
        raise ValueError("W must be binary")
    if not W.any():
        raise ValueError("W is all zeros")
    R, F = marginals(W)
    A = R @ (F.T @ F)               # n x 2
    B = R.T @ W                     # 2 x m
    Qa, Ra = np.linalg.qr(A)
    _, s, Vt = np.linalg.svd(Ra @ B, full_matrices=True)
    sv = np.zeros(min(n, m))
    sv[:len(s)] = s
    V = canonical_signs(Vt[:k].T.copy())
    return GelModel(V, sv)


def gel_transform(W_new, model: GelModel) -> np.ndarray:
    W_new = np.asarray(W_new, dtype=np.float64)
    if W_new.ndim != 2 or W_new.shape[1] != model.n_binary_features:
        raise ValueError(
            f"expected {model.n_binary_features} binary columns, got {W_new.shape[-1] if W_new.ndim else 0}")
    return W_new @ model.components


def quantile_edges(values: np.ndarray, bins: int) -> np.ndarray:
    v = values[~np.isnan(values)]
    return np.quantile(v, np.arange(1, bins) / bins)


def binarize(table: pd.DataFrame, schema: Sequence[ColumnSchema], bins: int = 10,
             edges: Mapping[str, np.ndarray] | None = None,
             include_numerical: bool = True) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """One-hot categorical columns and quantile-binned numerical columns.

    Returns ``W`` and the bin edges used (computed from ``table`` unless given).
    A constant numerical column contributes a single all-ones indicator.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    edges = dict(edges or {})
    blocks = []
    for c in schema:
        if c.kind == "categorical":
            idx = as_category_strings(table[c.name]).map(c.vocabulary).to_numpy(dtype=np.float64)
            block = np.zeros((len(table), c.cardinality))
            seen = ~np.isnan(idx)
            block[np.flatnonzero(seen), idx[seen].astype(np.int64)] = 1.0
            blocks.append(block)
        elif include_numerical:
            x = pd.to_numeric(table[c.name], errors="coerce").to_numpy(dtype=np.float64) \
                if c.kind == "numerical" else \
                as_category_strings(table[c.name]).map(c.vocabulary).fillna(len(c.vocabulary)).to_numpy(dtype=np.float64)
            if c.name not in edges:
                e = quantile_edges(x, bins)
                if e.size == 0 or np.nanmin(x) == np.nanmax(x):
                    warnings.warn(f"numerical column {c.name!r} is constant; using one indicator", stacklevel=2)
                    e = np.array([])
                edges[c.name] = e
            e = edges[c.name]
            width = len(e) + 1 if len(e) else 1
            b = np.searchsorted(e, x, side="left") if len(e) else np.zeros(len(x), dtype=np.int64)
            b = np.where(np.isnan(x), 0, b)
            block = np.zeros((len(table), width))
            block[np.arange(len(table)), b] = 1.0
            blocks.append(block)
    W = np.hstack(blocks) if blocks else np.zeros((len(table), 0))
    return W, edges


class GELEncoder(_TableEncoder):
    """GEL projection of the binarized table.

    By default only categorical attributes enter ``W`` and the numerical columns
    are appended standardized; ``include_numerical=True`` bins them into ``W``
    instead. ``k`` defaults to the number of categorical attributes.
    """
    kind_name = "gel"

    def __init__(self, kinds=None, exclude=("label",), k: int | None = None, bins: int = 10,
                 include_numerical: bool = False):
        super().__init__(kinds, exclude)
        self.k = k
        self.bins = bins
        self.include_numerical = include_numerical

    def fit(self, X, y=None):
        self._fit_base(X)
        W, edges = binarize(X, self.schema_, self.bins, include_numerical=self.include_numerical)
        k = self.k if self.k is not None else max(1, len(self.categorical_))
        model = gel_fit(W, min(k, W.shape[1]) if self.k is None else k)
        model.binarizer = {"bins": self.bins, "edges": edges, "include_numerical": self.include_numerical}
        self.model_ = model
        return self

    def binarize(self, X) -> np.ndarray:
        self._check_columns(X)
        W, _ = binarize(X, self.schema_, self.bins, self.model_.binarizer["edges"], self.include_numerical)
        return W

    def transform(self, X):
        check_is_fitted(self, "model_")
        out = gel_transform(self.binarize(X), self.model_)
        if not self.include_numerical:
            out = np.hstack([out, self.numeric_block(X)])
        return out

    @property
    def provenance_(self):
        check_is_fitted(self, "model_")
        prov = [("<gel>", "gel", str(j)) for j in range(self.model_.k)]
        return prov + ([] if self.include_numerical else self._numeric_provenance())
