import warnings

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from auditbench import persist
from auditbench.encode import (
    ColumnSchema, EmbeddingEncoder, EncodedMatrix, GELEncoder, SchemaError, TableLabelEncoder,
    TableOneHotEncoder, binarize, embed_concat, embedding_dims, fit_schema, gel_fit, gel_transform,
    init_embedding_tables, marginals,
)
from oracles import compare_right_vectors, gel_dense


@pytest.fixture
def small():
    return pd.DataFrame({
        "color": ["Red", "Blue", "Gelb", "Red", "Blue", "Red"],
        "size": ["S", "M", "L", "M", "S", "S"],
        "price": [10.0, 20.0, 30.0, 40.0, 50.0, 60.0],
        "label": [0, 0, 1, 0, 0, 0],
    })


# ------------------------------------------------------------- schema

def test_vocabulary_is_lexicographic(small):
    schema = {c.name: c for c in fit_schema(small)}
    assert schema["color"].vocabulary == {"Blue": 0, "Gelb": 1, "Red": 2}
    assert schema["price"].kind == "numerical"
    assert "label" not in schema


def test_kind_inference():
    df = pd.DataFrame({"a": ["3", "abc"], "b": ["1", "2.5"], "c": [1, 2]})
    kinds = {c.name: c.kind for c in fit_schema(df)}
    assert kinds == {"a": "categorical", "b": "numerical", "c": "numerical"}


def test_kind_override_and_ordinal_order():
    df = pd.DataFrame({"year": [2010, 2009, 2011, 2009], "cx": [10, 2, 1, 2]})
    s = {c.name: c for c in fit_schema(df, {"year": "categorical", "cx": "ordinal"})}
    assert s["year"].vocabulary == {"2009": 0, "2010": 1, "2011": 2}
    assert s["cx"].vocabulary == {"1": 0, "2": 1, "10": 2}


def test_schema_errors():
    with pytest.raises(SchemaError):
        fit_schema(pd.DataFrame())
    with pytest.raises(SchemaError):
        fit_schema(pd.DataFrame({"a": [None, None]}))


# ------------------------------------------------------------- label / one-hot

def test_label_encoding(small):
    enc = TableLabelEncoder().fit(small)
    out = enc.transform(pd.DataFrame({"color": ["Red", "Green"], "size": ["M", "XL"], "price": [35.0, 35.0]}))
    assert out[:, 0].tolist() == [2.0, 3.0]
    assert out[:, 1].tolist() == [1.0, 3.0]
    assert out.shape == (2, 3)
    assert out[0, 2] == pytest.approx(0.0)


def test_numeric_standardisation_uses_train_stats(small):
    enc = TableLabelEncoder().fit(small)
    tr = enc.transform(small)[:, -1]
    assert tr.mean() == pytest.approx(0.0, abs=1e-12)
    assert tr.std() == pytest.approx(1.0)
    odd = enc.transform(small.assign(price=[np.nan] * 6))[:, -1]
    assert np.allclose(odd, 0.0)


def test_one_hot_figure_example():
    df = pd.DataFrame({"c": ["a", "b", "c", "d"]})
    out = TableOneHotEncoder().fit(df).transform(df.iloc[[1]])
    assert out.tolist() == [[0.0, 1.0, 0.0, 0.0]]


def test_one_hot_blocks(small):
    enc = TableOneHotEncoder().fit(small)
    out = enc.transform(small)
    assert out.shape == (6, 3 + 3 + 1)
    assert np.array_equal(out[:, :6].sum(1), np.full(6, 2.0))
    unseen = enc.transform(pd.DataFrame({"color": ["Green"], "size": ["S"], "price": [1.0]}))
    assert unseen[0, :3].sum() == 0 and unseen[0, 3:6].sum() == 1


def test_encoded_matrix_csv_round_trip(tmp_path, small):
    enc = TableOneHotEncoder().fit(small)
    m = enc.encode(small, labels=small["label"].to_numpy())
    m.to_csv(tmp_path / "m.csv")
    back = EncodedMatrix.from_csv(tmp_path / "m.csv")
    assert np.array_equal(back.values, m.values)
    assert back.provenance == [tuple(p) for p in m.provenance]
    assert back.labels.tolist() == small["label"].tolist()
    with pytest.raises(ValueError):
        EncodedMatrix(np.array([[np.nan]]), [("a", "b", "")])


# ------------------------------------------------------------- binarize

def test_binarize_categorical_only_equals_one_hot(small):
    schema = fit_schema(small[["color", "size"]])
    W, _ = binarize(small, schema)
    oh = TableOneHotEncoder().fit(small[["color", "size"]]).transform(small)
    assert np.array_equal(W, oh)


def test_binarize_median_split():
    df = pd.DataFrame({"x": [1.0, 2.0, 3.0, 4.0]})
    W, edges = binarize(df, fit_schema(df), bins=2)
    assert W.tolist() == [[1, 0], [1, 0], [0, 1], [0, 1]]
    assert edges["x"].tolist() == [2.5]


def test_binarize_width(small):
    schema = fit_schema(small)
    W, _ = binarize(small, schema, bins=3)
    assert W.shape[1] == 3 + 3 + 3
    assert set(np.unique(W)) <= {0.0, 1.0}


def test_binarize_constant_column_warns():
    df = pd.DataFrame({"x": [5.0] * 4})
    with pytest.warns(UserWarning, match="constant"):
        W, _ = binarize(df, fit_schema(df))
    assert W.tolist() == [[1.0]] * 4


# ------------------------------------------------------------- GEL

def test_marginals_row_example():
    R, F = marginals(np.array([[1, 0, 0, 0], [1, 1, 0, 0]]))
    assert R[0].tolist() == [0.75, 0.25]
    assert F[0].tolist() == [0.0, 1.0]


@settings(max_examples=50, deadline=None)
@given(arrays(np.int8, st.tuples(st.integers(2, 30), st.integers(1, 15)), elements=st.integers(0, 1)))
def test_marginals_sum_to_one(W):
    R, F = marginals(W)
    assert np.allclose(R.sum(1), 1, atol=1e-12) and np.allclose(F.sum(1), 1, atol=1e-12)


def test_gel_identity_hand_case():
    model = gel_fit(np.eye(2), 1)
    assert model.singular_values[0] == pytest.approx(1.0, abs=1e-12)
    assert model.singular_values[1] == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(model.components[:, 0], [2 ** -0.5, 2 ** -0.5], atol=1e-12)
    assert np.allclose(gel_transform(np.eye(2), model), 0.70710678, atol=1e-6)


def test_gel_matches_dense_oracle_on_random_matrix():
    rng = np.random.default_rng(0)
    W = (rng.random((50, 20)) < 0.3).astype(float)
    model = gel_fit(W, 20)
    sv, V_ref = gel_dense(W)
    assert compare_right_vectors(model.components, sv, V_ref) < 1e-8
    assert np.allclose(model.singular_values, sv, atol=1e-10)


def test_gel_rank_is_at_most_two():
    rng = np.random.default_rng(1)
    W = (rng.random((40, 12)) < 0.5).astype(float)
    sv, _ = gel_dense(W)
    assert np.all(sv[2:] < 1e-10 * sv[0])
    assert np.all(gel_fit(W, 12).singular_values[2:] == 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(2, 50), st.integers(1, 20), st.floats(0.05, 0.95))
def test_gel_orthonormal_and_oracle(seed, n, m, density):
    rng = np.random.default_rng(seed)
    W = (rng.random((n, m)) < density).astype(float)
    if not W.any():
        W[0, 0] = 1
    k = int(rng.integers(1, m + 1))
    model = gel_fit(W, k)
    V = model.components
    assert np.abs(V.T @ V - np.eye(k)).max() < 1e-10
    sv, V_ref = gel_dense(W)
    assert compare_right_vectors(V, sv, V_ref) < 1e-8
    # canonical signs
    piv = np.abs(V).argmax(0)
    assert np.all(V[piv, np.arange(k)] > 0)


def test_gel_transform_linear_and_zero_row():
    rng = np.random.default_rng(2)
    W = (rng.random((20, 6)) < 0.4).astype(float)
    model = gel_fit(W, 3)
    x = rng.random((4, 6))
    assert np.allclose(gel_transform(2.5 * x, model), 2.5 * gel_transform(x, model))
    assert np.all(gel_transform(np.zeros((1, 6)), model) == 0)
    with pytest.raises(ValueError):
        gel_transform(np.zeros((1, 5)), model)


@pytest.mark.parametrize("W,k", [
    (np.eye(2), 3), (np.eye(2), 0), (np.zeros((3, 2)), 1), (np.array([[1, 0]]), 1), (np.full((2, 2), 0.5), 1),
])
def test_gel_fit_errors(W, k):
    with pytest.raises(ValueError):
        gel_fit(W, k)


def test_gel_encoder_width(small):
    enc = GELEncoder().fit(small)
    out = enc.transform(small)
    assert out.shape == (6, 2 + 1)
    assert enc.model_.k == 2
    both = GELEncoder(include_numerical=True, bins=2).fit(small)
    assert both.model_.n_binary_features == 3 + 3 + 2
    assert both.transform(small).shape == (6, 2)


# ------------------------------------------------------------- embeddings

@pytest.mark.parametrize("n,d", [(4, 2), (1000, 50), (1, 1), (5, 3), (99, 50), (100, 50), (101, 50)])
def test_embedding_dims(n, d):
    col = ColumnSchema("c", "categorical", {str(i): i for i in range(n)})
    assert embedding_dims([col]) == [d]


def test_embed_concat_shape_and_lookup():
    tables = init_embedding_tables([4], [2], seed=3)
    assert tables[0].shape == (5, 2)
    assert np.abs(tables[0]).max() <= 0.05
    out = embed_concat(np.array([[1], [1], [2]]), tables, np.zeros((3, 2)))
    assert out.shape == (3, 4)
    assert np.array_equal(out[0, :2], out[1, :2])
    assert not np.array_equal(out[0, :2], out[2, :2])


def test_embedding_encoder_frozen_and_seeded(small):
    a = EmbeddingEncoder(seed=4).fit(small)
    b = EmbeddingEncoder(seed=4).fit(small)
    assert np.array_equal(a.transform(small), a.transform(small))
    assert np.array_equal(a.transform(small), b.transform(small))
    assert a.transform(small).shape == (6, 2 + 2 + 1)
    unseen = a.transform(pd.DataFrame({"color": ["Green"], "size": ["S"], "price": [1.0]}))
    assert np.array_equal(unseen[0, :2], a.tables_[0][3])


def test_encoders_are_deterministic_and_finite(vc1k, vc_kinds):
    df, _ = vc1k
    for cls in (TableLabelEncoder, TableOneHotEncoder, GELEncoder, EmbeddingEncoder):
        x1 = cls(kinds=vc_kinds).fit(df).transform(df)
        x2 = cls(kinds=vc_kinds).fit(df).transform(df)
        assert x1.tobytes() == x2.tobytes()
        assert np.isfinite(x1).all()


def test_sklearn_params_round_trip():
    enc = GELEncoder(k=3, bins=4)
    assert enc.get_params()["k"] == 3
    assert enc.set_params(bins=5).bins == 5


@pytest.mark.parametrize("cls", [TableLabelEncoder, TableOneHotEncoder, GELEncoder, EmbeddingEncoder])
def test_encoder_persistence(tmp_path, small, cls):
    enc = cls().fit(small)
    persist.dump(enc, tmp_path / "e.bin")
    back = persist.load(tmp_path / "e.bin")
    assert type(back) is cls
    assert np.array_equal(back.transform(small), enc.transform(small))
