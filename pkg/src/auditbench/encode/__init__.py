"""Categorical representations: label, one-hot, GEL, and embedding tables."""
from .encoders import (
    EmbeddingEncoder, TableLabelEncoder, TableOneHotEncoder, embed_concat, embedding_dims,
    init_embedding_tables,
)
from .gel import GELEncoder, GelModel, binarize, canonical_signs, gel_fit, gel_transform, marginals
from .schema import ColumnSchema, EncodedMatrix, SchemaError, fit_schema, infer_kind

ENCODERS = {
    "label": TableLabelEncoder,
    "onehot": TableOneHotEncoder,
    "gel": GELEncoder,
    "embedding": EmbeddingEncoder,
}

__all__ = [
    "ENCODERS", "ColumnSchema", "EmbeddingEncoder", "EncodedMatrix", "GELEncoder", "GelModel",
    "SchemaError", "TableLabelEncoder", "TableOneHotEncoder", "binarize", "canonical_signs",
    "embed_concat", "embedding_dims", "fit_schema", "gel_fit", "gel_transform", "infer_kind",
    "init_embedding_tables", "marginals",
]
