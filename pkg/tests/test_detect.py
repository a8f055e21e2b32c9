import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from auditbench import persist
from auditbench.detect import (
    AutoencoderDetector, IsolationForestDetector, LOFDetector, SOMDetector, ZScoreDetector,
    average_path_length, zscore_score,
)
from oracles import c_factor, finite_difference, lof_brute, relative_error, som_bmu_distance


def two_clusters_with_outlier(seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal([0, 0], 0.3, size=(60, 2))
    b = rng.normal([5, 5], 0.3, size=(60, 2))
    return np.vstack([a, b, [[30.0, -30.0]]])


# ------------------------------------------------------------------ SOM

def test_som_zero_learning_rate_keeps_initial_weights():
    X = np.random.default_rng(1).normal(size=(50, 3))
    untouched = SOMDetector(grid_size=5, learning_rate=0.0, n_iterations=0).fit(X).weights_
    trained = SOMDetector(grid_size=5, learning_rate=0.0, n_iterations=200).fit(X).weights_
    assert np.array_equal(untouched, trained)


def test_som_contracts_to_single_point():
    p = np.array([[1.5, -2.0, 0.25]])
    som = SOMDetector(grid_size=5, n_iterations=300).fit(np.repeat(p, 40, axis=0))
    assert np.abs(som.weights_[som.bmu(p)[0]] - p[0]).max() < 1e-3
    assert som.anomaly_score(p)[0] < 1e-3


def test_som_contracts_from_spread_init():
    # two rows define the init box; training then sees only the first point
    rng = np.random.default_rng(3)
    X = np.vstack([np.full((1, 2), 4.0), rng.normal(size=(30, 2))])
    som = SOMDetector(grid_size=5, n_iterations=2000, learning_rate=0.5, sigma=1.0).fit(X)
    som2 = SOMDetector(grid_size=5, n_iterations=0).fit(X)
    assert not np.array_equal(som.weights_, som2.weights_)
    assert np.isfinite(som.weights_).all()


def test_som_scores_match_brute_force_bmu():
    X = two_clusters_with_outlier()
    # a map trained on the outlier too would dedicate a neuron to it
    som = SOMDetector(grid_size=5, n_iterations=300).fit(X[:-1])
    s = som.anomaly_score(X)
    oracle = np.array([som_bmu_distance(x, som.weights_) for x in X])
    assert np.allclose(s, oracle, atol=1e-12)
    assert s.argmax() == len(X) - 1
    assert (s >= 0).all()


def test_som_neuron_weight_scores_zero_and_deterministic():
    X = two_clusters_with_outlier(2)
    a = SOMDetector(grid_size=4, n_iterations=100, random_state=7).fit(X)
    b = SOMDetector(grid_size=4, n_iterations=100, random_state=7).fit(X)
    assert np.array_equal(a.weights_, b.weights_)
    assert np.allclose(a.anomaly_score(a.weights_), 0.0, atol=1e-7)


def test_som_quantisation_bounded_by_diameter():
    X = np.random.default_rng(4).uniform(size=(80, 3))
    s = SOMDetector(grid_size=5, n_iterations=200).fit_score(X)
    diam = max(math.dist(p, q) for p in X for q in X)
    assert s.max() <= diam


def test_som_errors():
    with pytest.raises(ValueError):
        SOMDetector().fit(np.empty((0, 2)))
    som = SOMDetector(grid_size=3, n_iterations=5).fit(np.eye(3))
    with pytest.raises(ValueError, match="features"):
        som.anomaly_score(np.eye(2))


# ------------------------------------------------------------------ Isolation forest

def exact_expected_path(values, x, limit, depth=0):
    """Expected isolation depth of ``x`` in 1-D by exhaustive enumeration of split intervals."""
    values = sorted(values)
    lo, hi = values[0], values[-1]
    if depth >= limit or len(values) <= 1 or lo == hi:
        return depth + c_factor(len(values))
    total = 0.0
    distinct = sorted(set(values))
    for a, b in zip(distinct[:-1], distinct[1:]):
        # any split p in (a, b] sends {v < p} left; here p lies in (a, b)
        side = [v for v in values if v <= a] if x <= a else [v for v in values if v > a]
        total += (b - a) / (hi - lo) * exact_expected_path(side, x, limit, depth + 1)
    return total


def test_average_path_length_values():
    assert average_path_length([0, 1, 2]).tolist() == [0.0, 0.0, 1.0]
    for n in (3, 4, 10, 256):
        assert average_path_length(n) == pytest.approx(c_factor(n), abs=1e-12)


def test_iforest_four_point_example():
    X = np.array([[0.0], [0.0], [0.0], [10.0]])
    f = IsolationForestDetector(n_estimators=100, max_samples=4).fit(X)
    h = f.path_lengths(np.array([[0.0], [10.0]])).mean(1)
    assert h[1] == pytest.approx(exact_expected_path([0, 0, 0, 10], 10, 2), abs=1e-12)
    assert h[0] == pytest.approx(exact_expected_path([0, 0, 0, 10], 0, 2), abs=1e-12)
    assert h[0] == pytest.approx(1 + c_factor(3), abs=1e-12)
    s = f.anomaly_score(X)
    assert s[3] > s[0] and s[0] == s[1] == s[2]


def test_iforest_matches_enumeration_in_expectation():
    data = [0.0, 1.0, 2.0, 5.0, 20.0, 21.0]
    X = np.array(data)[:, None]
    f = IsolationForestDetector(n_estimators=3000, max_samples=6, random_state=5).fit(X)
    h = f.path_lengths(X).mean(1)
    limit = math.ceil(math.log2(6))
    oracle = [exact_expected_path(data, x, limit) for x in data]
    assert np.allclose(h, oracle, atol=0.05)


def test_iforest_depth_limits():
    X = np.random.default_rng(0).normal(size=(64, 3))
    f = IsolationForestDetector(n_estimators=20, max_samples=2).fit(X)
    assert f.node_depth_.max() <= 1
    f = IsolationForestDetector(n_estimators=20, max_samples=32).fit(X)
    assert f.node_depth_.max() <= 5
    h = f.path_lengths(X)
    assert h.max() <= 5 + c_factor(32)


def test_iforest_scores_range_and_determinism():
    X = two_clusters_with_outlier()
    a = IsolationForestDetector(n_estimators=50, random_state=3).fit(X).anomaly_score(X)
    b = IsolationForestDetector(n_estimators=50, random_state=3).fit(X).anomaly_score(X)
    assert np.array_equal(a, b)
    assert ((a > 0) & (a <= 1)).all()
    assert a.argmax() == len(X) - 1
    dup = IsolationForestDetector(n_estimators=10).fit(X).anomaly_score(np.vstack([X[:1], X[:1]]))
    assert dup[0] == dup[1]


def test_iforest_constant_matrix_warns():
    with pytest.warns(UserWarning):
        f = IsolationForestDetector(n_estimators=5).fit(np.ones((10, 2)))
    assert np.allclose(f.anomaly_score(np.ones((1, 2))), 2 ** (-c_factor(10) / c_factor(10)))


@pytest.mark.parametrize("kw", [{"n_estimators": 0}, {"max_samples": 1}, {"max_samples": 11}])
def test_iforest_bad_params(kw):
    with pytest.raises(ValueError):
        IsolationForestDetector(**kw).fit(np.random.default_rng(0).normal(size=(10, 2)))


# ------------------------------------------------------------------ LOF

def grid(n=7):
    return np.array([(i, j) for i in range(n) for j in range(n)], dtype=float)


def test_lof_grid_interior_near_one():
    G = grid()
    s = LOFDetector(n_neighbors=3).fit(G).training_scores_
    interior = (G.min(1) >= 2) & (G.max(1) <= 4)
    assert np.all((s[interior] >= 0.9) & (s[interior] <= 1.1))


def test_lof_grid_outlier_matches_oracle():
    G = np.vstack([grid(), [[16.0, 3.0]]])
    lof = LOFDetector(n_neighbors=3).fit(G)
    oracle = lof_brute(G, k=3)
    assert np.allclose(lof.training_scores_, oracle, rtol=1e-9)
    assert lof.training_scores_[-1] > 1.5


def test_lof_query_scores_match_oracle():
    rng = np.random.default_rng(6)
    train = np.round(rng.normal(size=(40, 2)), 1)  # rounding creates distance ties
    queries = np.vstack([rng.normal(size=(10, 2)), train[:3], [[8.0, 8.0]]])
    lof = LOFDetector(n_neighbors=4).fit(train)
    assert np.allclose(lof.anomaly_score(queries), lof_brute(train, queries, k=4), rtol=1e-9)
    assert np.allclose(lof.training_scores_, lof_brute(train, k=4), rtol=1e-9)


def test_lof_duplicates_are_finite():
    X = np.vstack([np.zeros((10, 2)), np.ones((3, 2))])
    lof = LOFDetector(n_neighbors=3).fit(X)
    assert np.isfinite(lof.training_scores_).all()
    assert np.isfinite(lof.anomaly_score(np.array([[0.5, 0.5]]))).all()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_lof_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    X = np.round(rng.normal(size=(30, 3)), 1)
    Q = rng.normal(size=(5, 3))
    perm = rng.permutation(30)
    a = LOFDetector(n_neighbors=5).fit(X)
    b = LOFDetector(n_neighbors=5).fit(X[perm])
    assert np.allclose(a.anomaly_score(Q), b.anomaly_score(Q), rtol=1e-10)
    assert np.allclose(a.training_scores_[perm], b.training_scores_, rtol=1e-10)


def test_lof_k_must_be_below_rows():
    with pytest.raises(ValueError):
        LOFDetector(n_neighbors=5).fit(np.eye(5))


# ------------------------------------------------------------------ autoencoder

def toy_embedding_net(seed):
    rng = np.random.default_rng(seed)
    ae = AutoencoderDetector(hidden=(5, 3), cardinalities=[3, 4], random_state=seed).initialize(4)
    for p in ae.parameters():
        p[...] = rng.normal(scale=0.5, size=p.shape)
    X = np.column_stack([rng.integers(0, 4, 6), rng.integers(0, 5, 6), rng.normal(size=(6, 2))]).astype(float)
    return ae, X


@pytest.mark.parametrize("seed", range(5))
def test_ae_gradients_match_finite_differences(seed):
    ae, X = toy_embedding_net(seed)
    _, analytic = ae.loss_and_gradients(X)
    numeric = finite_difference(lambda: ae.loss_and_gradients(X)[0], ae.parameters())
    for a, n in zip(analytic, numeric):
        assert relative_error(a, n) < 1e-4


def test_ae_plain_gradients():
    rng = np.random.default_rng(9)
    ae = AutoencoderDetector(hidden=(4, 2, 4)).initialize(3)
    X = rng.normal(size=(7, 3))
    _, analytic = ae.loss_and_gradients(X)
    numeric = finite_difference(lambda: ae.loss_and_gradients(X)[0], ae.parameters())
    assert len(analytic) == 8
    assert max(relative_error(a, n) for a, n in zip(analytic, numeric)) < 1e-4


def test_ae_embedding_gradient_only_on_present_rows():
    ae, X = toy_embedding_net(11)
    X[:, 0] = 1
    X[:, 1] = np.array([0, 0, 2, 2, 2, 0])
    grads = ae.loss_and_gradients(X)[1]
    t0, t1 = grads[-2], grads[-1]
    assert np.flatnonzero(np.abs(t0).sum(1)).tolist() == [1]
    assert np.flatnonzero(np.abs(t1).sum(1)).tolist() == [0, 2]


def test_ae_zero_input_zero_loss():
    ae = AutoencoderDetector().initialize(6)
    assert ae.loss_and_gradients(np.zeros((4, 6)))[0] == 0.0


def test_ae_training_reduces_loss():
    X = np.random.default_rng(0).normal(size=(100, 5))
    ae = AutoencoderDetector(epochs=50, batch_size=16).fit(X)
    h = np.array(ae.history_)
    assert np.isfinite(h).all() and h[-1] < h[0]
    ma = np.convolve(h, np.ones(10) / 10, mode="valid")
    assert np.all(np.diff(ma) <= 1e-12)


def test_ae_learns_single_point():
    p = np.array([[0.5, -1.0, 2.0]])
    ae = AutoencoderDetector(hidden=(8, 8), epochs=800, batch_size=8, learning_rate=1e-2).fit(np.repeat(p, 8, 0))
    assert ae.anomaly_score(p)[0] < 1e-4


def test_ae_outliers_score_higher():
    rng = np.random.default_rng(1)
    normal = rng.normal(size=(300, 4))
    ae = AutoencoderDetector(epochs=30, batch_size=32).fit(normal)
    test_normal = rng.normal(size=(50, 4))
    outliers = rng.normal(6, 1, size=(50, 4))
    assert ae.anomaly_score(outliers).mean() > ae.anomaly_score(test_normal).mean()
    assert (ae.anomaly_score(test_normal) >= 0).all()


def test_ae_embedding_training_updates_tables():
    ae0, X = toy_embedding_net(2)
    ae = AutoencoderDetector(hidden=(5, 3), cardinalities=[3, 4], epochs=3, batch_size=3).fit(X)
    init = AutoencoderDetector(hidden=(5, 3), cardinalities=[3, 4]).initialize(4).tables_
    assert not np.array_equal(ae.tables_[0], init[0])
    assert ae.reconstruct(X).shape == (6, 2 + 2 + 2)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_ae_nan_loss_aborts():
    X = np.random.default_rng(0).normal(size=(20, 3)) * 1e200
    with pytest.raises(FloatingPointError, match="learning rate"):
        AutoencoderDetector(epochs=2).fit(X)


# ------------------------------------------------------------------ z-score

def test_zscore_basics():
    X = np.array([[1.0, 0], [2, 0], [3, 0], [6, 0]])
    d = ZScoreDetector(column=0).fit(X)
    assert d.anomaly_score(np.array([[3.0, 9]]))[0] == 0.0
    z = zscore_score(X, 0)
    assert np.allclose(z, np.abs(X[:, 0] - 3) / X[:, 0].std())
    with pytest.raises(ValueError, match="variance"):
        zscore_score(X, 1)


@given(st.floats(0.1, 100), st.floats(-100, 100))
def test_zscore_affine_invariant(a, b):
    x = np.array([[1.0], [4.0], [2.0], [9.0], [3.0]])
    assert np.argsort(zscore_score(x)).tolist() == np.argsort(zscore_score(a * x + b)).tolist()


# ------------------------------------------------------------------ shared

@pytest.mark.parametrize("det", [
    SOMDetector(grid_size=3, n_iterations=20), IsolationForestDetector(n_estimators=10),
    LOFDetector(n_neighbors=3), AutoencoderDetector(epochs=2), ZScoreDetector(),
])
def test_detectors_persist_and_predict(tmp_path, det):
    X = two_clusters_with_outlier(5)
    s = det.fit_score(X)
    assert np.isfinite(s).all() and s.shape == (len(X),)
    persist.dump(det, tmp_path / "m.bin")
    back = persist.load(tmp_path / "m.bin")
    assert np.array_equal(back.anomaly_score(X), s)
    flags = det.predict(X, tau=0.1)
    assert flags.sum() == math.ceil(0.1 * len(X))
    with pytest.raises(ValueError):
        det.anomaly_score(np.zeros((2, 5)))
