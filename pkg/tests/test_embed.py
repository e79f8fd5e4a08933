import math

import numpy as np
import pytest

from herdlens.cluster import kmeans, ClusterConfig
from herdlens.embed import (EmbeddingConfig, UMAP, fit_curve,
                            fuzzy_simplicial_set, knn_exact,
                            membership_strengths, optimize_layout, smooth_knn,
                            spectral_init, umap)
from herdlens.errors import TooFewPoints
from herdlens.synth import gen_blobs


def _brute_force_knn(X, k):
    n = X.shape[0]
    idx = np.empty((n, k), dtype=int)
    dist = np.empty((n, k))
    for i in range(n):
        pairs = []
        for j in range(n):
            if j == i:
                continue
            pairs.append((math.dist(X[i], X[j]), j))
        pairs.sort()
        idx[i] = [j for _, j in pairs[:k]]
        dist[i] = [d for d, _ in pairs[:k]]
    return idx, dist


def test_knn_collinear():
    X = np.array([[0.0], [1.0], [3.0]])
    idx, dist = knn_exact(X, 1)
    assert idx.ravel().tolist() == [1, 0, 1]
    assert dist.ravel().tolist() == [1.0, 1.0, 2.0]


def test_knn_duplicate_tie_rule():
    X = np.array([[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [5.0, 5.0]])
    idx, dist = knn_exact(X, 2)
    assert idx[3].tolist() == [0, 1]  # equal distances ranked by index
    assert idx[2].tolist() == [0, 1]
    assert idx[0].tolist() == [1, 2]


def test_knn_matches_brute_force():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 10))
    idx, dist = knn_exact(X, 7)
    bidx, bdist = _brute_force_knn(X, 7)
    assert np.array_equal(idx, bidx)
    assert np.allclose(dist, bdist, atol=1e-10)


def test_knn_too_few_points():
    with pytest.raises(TooFewPoints):
        knn_exact(np.zeros((3, 2)), 3)


def test_fuzzy_single_neighbor_weight_one():
    X = np.array([[0.0], [1.0], [10.0]])
    idx, dist = knn_exact(X, 1)
    rho, sigma = smooth_knn(dist)
    w = membership_strengths(idx, dist, rho, sigma)
    assert np.allclose(w, 1.0)


def test_fuzzy_union_of_ones_is_one():
    X = np.array([[0.0], [1.0], [10.0], [11.0]])
    graph = fuzzy_simplicial_set(*knn_exact(X, 1))
    # mutual nearest neighbors: union weight 1 + 1 - 1 = 1
    m = graph.matrix().toarray()
    assert m[0, 1] == pytest.approx(1.0)
    assert m[1, 0] == pytest.approx(1.0)


def test_binary_search_residual():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(150, 8))
    k = 12
    idx, dist = knn_exact(X, k)
    rho, sigma = smooth_knn(dist)
    w = membership_strengths(idx, dist, rho, sigma)
    distinct = np.array([len(set(np.round(row, 12))) >= 2 for row in dist])
    residual = np.abs(w.sum(axis=1) - math.log2(k))
    assert residual[distinct].max() <= 1e-5


def test_fuzzy_graph_symmetric_weights_in_unit_interval():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(80, 5))
    graph = fuzzy_simplicial_set(*knn_exact(X, 6))
    m = graph.matrix()
    assert (abs(m - m.T)).max() < 1e-12
    assert graph.weights.min() > 0.0 and graph.weights.max() <= 1.0 + 1e-12
    assert not np.any(graph.rows == graph.cols)


def _curve_fit_oracle(min_dist):
    # independent coarse-to-fine grid search on the same least-squares target
    xv = np.linspace(0.0, 3.0, 300)
    yv = np.where(xv < min_dist, 1.0, np.exp(-(xv - min_dist)))

    def sse(a, b):
        return float(((1.0 / (1.0 + a * xv ** (2.0 * b)) - yv) ** 2).sum())

    best = (math.inf, None, None)
    a_lo, a_hi, b_lo, b_hi = 0.2, 5.0, 0.3, 2.0
    for _ in range(6):
        for a in np.linspace(a_lo, a_hi, 41):
            for b in np.linspace(b_lo, b_hi, 41):
                s = sse(a, b)
                if s < best[0]:
                    best = (s, a, b)
        da, db = (a_hi - a_lo) / 40, (b_hi - b_lo) / 40
        a_lo, a_hi = best[1] - 2 * da, best[1] + 2 * da
        b_lo, b_hi = best[2] - 2 * db, best[2] + 2 * db
    return best


def test_fit_curve_matches_independent_oracle():
    a, b = fit_curve(0.01)
    sse_best, a_star, b_star = _curve_fit_oracle(0.01)
    assert a == pytest.approx(a_star, abs=1e-3)
    assert b == pytest.approx(b_star, abs=1e-3)
    # frozen spot values from the oracle
    assert a == pytest.approx(1.8956, abs=1e-3)
    assert b == pytest.approx(0.8006, abs=1e-3)


def test_fit_curve_kernel_shape():
    min_dist = 0.01
    a, b = fit_curve(min_dist)
    assert 1.0 / (1.0 + a * 0.0) == pytest.approx(1.0, abs=1e-3)
    at3 = 1.0 / (1.0 + a * 3.0 ** (2 * b))
    assert at3 == pytest.approx(math.exp(-(3.0 - min_dist)), abs=0.05)


def _path_graph(n):
    rows = np.concatenate([np.arange(n - 1), np.arange(1, n)])
    cols = np.concatenate([np.arange(1, n), np.arange(n - 1)])
    from herdlens.embed import FuzzyGraph
    return FuzzyGraph(n=n, rows=rows, cols=cols,
                      weights=np.ones(2 * (n - 1)),
                      rho=np.zeros(n), sigma=np.ones(n))


def test_spectral_init_path_graph_monotone():
    n = 10
    coords, fallback = spectral_init(_path_graph(n), 1, seed=0)
    assert not fallback
    # the symmetric-normalized eigenvector is monotone along the path once
    # rescaled by sqrt(degree) (degree-1 endpoints break strict order)
    deg = np.array([1.0] + [2.0] * (n - 2) + [1.0])
    rw = coords[:, 0] / np.sqrt(deg)
    diffs = np.diff(rw)
    assert np.all(diffs > 0) or np.all(diffs < 0)
    assert np.abs(coords).max() <= 10.0 + 0.01


def test_spectral_init_disconnected_fallback():
    from herdlens.embed import FuzzyGraph
    graph = FuzzyGraph(n=6, rows=np.array([0, 1, 3, 4]),
                       cols=np.array([1, 0, 4, 3]),
                       weights=np.ones(4), rho=np.zeros(6), sigma=np.ones(6))
    coords, fallback = spectral_init(graph, 2, seed=0)
    assert fallback
    assert coords.shape == (6, 2)
    assert np.abs(coords).max() <= 10.0


def test_layout_zero_epochs_is_identity():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(40, 3))
    graph = fuzzy_simplicial_set(*knn_exact(X, 5))
    init = rng.normal(size=(40, 2))
    cfg = EmbeddingConfig(n_neighbors=5, n_epochs=0, seed=1)
    out = optimize_layout(graph, init, cfg)
    assert np.array_equal(out, init)


def test_layout_separates_two_blobs():
    blobs = gen_blobs(seed=4, k=2, n_per=50, d=2, sigma=0.3, sep=8.0)
    result = umap(blobs.points, EmbeddingConfig(n_neighbors=10, seed=5))
    a = result.coords[blobs.labels == 0]
    b = result.coords[blobs.labels == 1]
    inter = np.linalg.norm(a.mean(axis=0) - b.mean(axis=0))
    spread = np.mean([np.linalg.norm(a - a.mean(axis=0), axis=1).mean(),
                      np.linalg.norm(b - b.mean(axis=0), axis=1).mean()])
    assert inter > 3.0 * spread


def test_umap_deterministic_bit_identical():
    blobs = gen_blobs(seed=6, k=3, n_per=40, d=10)
    cfg = EmbeddingConfig(n_neighbors=8, seed=9)
    r1 = umap(blobs.points, cfg)
    r2 = umap(blobs.points, cfg)
    assert np.array_equal(r1.coords, r2.coords)


def test_umap_tiny_input_runs():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    result = umap(X, EmbeddingConfig(n_neighbors=20, n_epochs=20, seed=0))
    assert result.coords.shape == (3, 2)
    assert np.all(np.isfinite(result.coords))
    assert any("clamped" in w for w in result.warnings)


def test_umap_rest_config_no_clamp():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(60, 4))
    result = umap(X, EmbeddingConfig(n_neighbors=50, min_dist=0.01,
                                     n_epochs=30, seed=0))
    assert not any("clamped" in w for w in result.warnings)


def test_umap_blob_label_purity():
    blobs = gen_blobs(seed=8, k=3, n_per=100, d=34)
    result = umap(blobs.points, EmbeddingConfig(n_neighbors=15, seed=2))
    idx, _ = knn_exact(result.coords, 10)
    purity = float((blobs.labels[idx] == blobs.labels[:, None]).mean())
    assert purity >= 0.9


def test_umap_neighborhood_preservation():
    # blobs of 11 points: each 10-NN set is exactly the blob, so preservation
    # measures whether the embedding keeps blobs intact
    blobs = gen_blobs(seed=10, k=6, n_per=11, d=16)
    result = umap(blobs.points, EmbeddingConfig(n_neighbors=10, seed=2))
    before, _ = knn_exact(blobs.points, 10)
    after, _ = knn_exact(result.coords, 10)
    preserved = np.mean([
        len(set(before[i]) & set(after[i])) / 10.0
        for i in range(blobs.points.shape[0])
    ])
    assert preserved >= 0.6


def test_estimator_api():
    blobs = gen_blobs(seed=11, k=2, n_per=30, d=6)
    est = UMAP(n_neighbors=8, n_epochs=50, random_state=1)
    coords = est.fit_transform(blobs.points)
    assert coords.shape == (60, 2)
    params = est.get_params()
    assert params["n_neighbors"] == 8 and params["random_state"] == 1
