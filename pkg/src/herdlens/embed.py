"""From-scratch UMAP: exact kNN, fuzzy graph, spectral init, SGD layout.

The implementation favors verifiability over throughput: neighbors are
exact (no NN-descent), the layout pass is sequential with a seeded RNG,
and every run with the same seed is bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph
from numba import njit
from scipy.optimize import curve_fit
from sklearn.base import BaseEstimator
from sklearn.utils import check_array

from .errors import TooFewPoints

SIGMA_LO = 1e-8
SIGMA_HI = 1e4
SPECTRAL_JITTER = 1e-4
GRAD_CLIP = 4.0


@dataclass(frozen=True)
class EmbeddingConfig:
    n_neighbors: int = 15
    min_dist: float = 0.1
    n_components: int = 2
    metric: str = "euclidean"
    n_epochs: Optional[int] = None  # None: 500 if n < 10000 else 200
    learning_rate: float = 1.0
    negative_sample_rate: int = 5
    seed: int = 0


@dataclass
class FuzzyGraph:
    """Symmetrized fuzzy neighborhood graph in COO form (no self edges)."""

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray  # in (0, 1]
    rho: np.ndarray
    sigma: np.ndarray

    def matrix(self) -> scipy.sparse.csr_matrix:
        return scipy.sparse.coo_matrix(
            (self.weights, (self.rows, self.cols)), shape=(self.n, self.n)
        ).tocsr()


@dataclass
class UmapResult:
    coords: np.ndarray
    spectral_fallback: bool
    warnings: list[str] = field(default_factory=list)


def knn_exact(data: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact Euclidean k nearest neighbors; ties broken by lower index.

    Returns (indices, distances), each (n, k), distances ascending.
    """
    X = np.asarray(data, dtype=np.float64)
    n = X.shape[0]
    if k < 1 or n <= k:
        raise TooFewPoints(f"need n > k >= 1, got n={n}, k={k}")
    sq = np.einsum("ij,ij->i", X, X)
    idx_out = np.empty((n, k), dtype=np.int64)
    dist_out = np.empty((n, k), dtype=np.float64)
    block = 512
    for start in range(0, n, block):
        stop = min(start + block, n)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (X[start:stop] @ X.T)
        np.maximum(d2, 0.0, out=d2)
        for r in range(stop - start):
            d2[r, start + r] = np.inf  # exclude self
        order = np.argsort(d2, axis=1, kind="stable")[:, :k]
        idx_out[start:stop] = order
        dist_out[start:stop] = np.sqrt(np.take_along_axis(d2, order, axis=1))
    return idx_out, dist_out


def smooth_knn(dists: np.ndarray, target: Optional[float] = None
               ) -> tuple[np.ndarray, np.ndarray]:
    """Per-point rho (nearest nonzero distance) and sigma (bandwidth).

    sigma_i solves sum_j exp(-max(0, d_ij - rho_i) / sigma_i) = log2(k)
    by 64 bisection steps on [1e-8, 1e4].
    """
    d = np.asarray(dists, dtype=np.float64)
    n, k = d.shape
    nonzero = np.where(d > 0.0, d, np.inf)
    rho = nonzero.min(axis=1)
    rho[~np.isfinite(rho)] = 0.0  # all-duplicate neighborhood

    tgt = np.log2(k) if target is None else target
    shifted = np.maximum(d - rho[:, None], 0.0)
    lo = np.full(n, SIGMA_LO)
    hi = np.full(n, SIGMA_HI)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        val = np.exp(-shifted / mid[:, None]).sum(axis=1)
        too_big = val > tgt
        hi = np.where(too_big, mid, hi)
        lo = np.where(too_big, lo, mid)
    sigma = 0.5 * (lo + hi)
    return rho, sigma


def membership_strengths(idx: np.ndarray, dists: np.ndarray,
                         rho: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Directed weights exp(-max(0, d - rho) / sigma), shape (n, k)."""
    shifted = np.maximum(dists - rho[:, None], 0.0)
    return np.exp(-shifted / sigma[:, None])


def fuzzy_simplicial_set(idx: np.ndarray, dists: np.ndarray) -> FuzzyGraph:
    """Build the symmetrized fuzzy graph via fuzzy union a + b - a*b."""
    n, k = idx.shape
    rho, sigma = smooth_knn(dists)
    w = membership_strengths(idx, dists, rho, sigma)
    rows = np.repeat(np.arange(n, dtype=np.int64), k)
    cols = idx.ravel()
    P = scipy.sparse.coo_matrix((w.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    P.sum_duplicates()
    S = P + P.T - P.multiply(P.T)
    S = scipy.sparse.coo_matrix(S)
    S.eliminate_zeros()
    keep = S.row != S.col
    return FuzzyGraph(n=n, rows=S.row[keep], cols=S.col[keep],
                      weights=S.data[keep], rho=rho, sigma=sigma)


def fit_curve(min_dist: float, spread: float = 1.0) -> tuple[float, float]:
    """Fit (a, b) of the low-dimensional kernel 1 / (1 + a d^(2b)).

    Least squares against the offset exponential: 1 for d <= min_dist,
    exp(-(d - min_dist) / spread) beyond, sampled at 300 points on [0, 3*spread].
    """

    def kernel(x, a, b):
        return 1.0 / (1.0 + a * x ** (2.0 * b))

    xv = np.linspace(0.0, spread * 3.0, 300)
    yv = np.where(xv < min_dist, 1.0, np.exp(-(xv - min_dist) / spread))
    params, _ = curve_fit(kernel, xv, yv)
    return float(params[0]), float(params[1])


def spectral_init(graph: FuzzyGraph, n_components: int, seed: int
                  ) -> tuple[np.ndarray, bool]:
    """Laplacian-eigenvector initialization scaled to max-abs 10.

    Disconnected graphs fall back to seeded uniform random in [-10, 10];
    the second return value flags the fallback.
    """
    rng = np.random.default_rng(seed)
    W = graph.matrix()
    n_comp, _ = scipy.sparse.csgraph.connected_components(W, directed=False)
    if n_comp > 1:
        coords = rng.uniform(-10.0, 10.0, size=(graph.n, n_components))
        return coords, True

    deg = np.asarray(W.sum(axis=1)).ravel()
    inv_sqrt = 1.0 / np.sqrt(np.maximum(deg, 1e-12))
    D = scipy.sparse.diags(inv_sqrt)
    L = scipy.sparse.identity(graph.n) - D @ W @ D
    if graph.n <= 4096:
        vals, vecs = np.linalg.eigh(L.toarray())
        order = np.argsort(vals)
        vecs = vecs[:, order[1:n_components + 1]]
    else:
        v0 = rng.uniform(-1, 1, graph.n)
        vals, vecs = scipy.sparse.linalg.eigsh(
            L.tocsc(), k=n_components + 1, sigma=0.0, which="LM", v0=v0)
        order = np.argsort(vals)
        vecs = vecs[:, order[1:n_components + 1]]
    # deterministic sign: largest-magnitude component positive
    for c in range(vecs.shape[1]):
        pivot = np.argmax(np.abs(vecs[:, c]))
        if vecs[pivot, c] < 0:
            vecs[:, c] = -vecs[:, c]
    scale = 10.0 / max(np.abs(vecs).max(), 1e-12)
    coords = vecs * scale + rng.normal(0.0, SPECTRAL_JITTER, size=vecs.shape)
    return coords, False


def make_epochs_per_sample(weights: np.ndarray, n_epochs: int) -> np.ndarray:
    n_samples = n_epochs * (weights / weights.max())
    return np.where(n_samples > 0, float(n_epochs) / n_samples, np.inf)


@njit(cache=True)
def _layout_kernel(emb, heads, tails, eps, a, b, gamma, n_epochs, lr0,
                   neg_rate, seed):  # pragma: no cover - jitted
    n, dim = emb.shape
    n_edges = heads.shape[0]
    epn = eps / neg_rate
    next_sample = eps.copy()
    next_neg = epn.copy()
    state = np.uint64(seed * np.uint64(2654435761) + np.uint64(0x9E3779B97F4A7C15))
    for epoch in range(n_epochs):
        alpha = lr0 * (1.0 - epoch / n_epochs)
        for e in range(n_edges):
            if next_sample[e] > epoch:
                continue
            j = heads[e]
            k = tails[e]
            dsq = 0.0
            for d in range(dim):
                diff = emb[j, d] - emb[k, d]
                dsq += diff * diff
            if dsq > 0.0:
                coeff = (-2.0 * a * b * dsq ** (b - 1.0)) / (1.0 + a * dsq ** b)
            else:
                coeff = 0.0
            for d in range(dim):
                g = coeff * (emb[j, d] - emb[k, d])
                if g > GRAD_CLIP:
                    g = GRAD_CLIP
                elif g < -GRAD_CLIP:
                    g = -GRAD_CLIP
                emb[j, d] += alpha * g
                emb[k, d] -= alpha * g
            next_sample[e] += eps[e]

            n_neg = int((epoch - next_neg[e]) / epn[e])
            for _ in range(n_neg):
                state ^= state << np.uint64(13)
                state ^= state >> np.uint64(7)
                state ^= state << np.uint64(17)
                c = int(state >> np.uint64(33)) % n
                if c == j:
                    continue
                dsq = 0.0
                for d in range(dim):
                    diff = emb[j, d] - emb[c, d]
                    dsq += diff * diff
                if dsq > 0.0:
                    coeff = (2.0 * gamma * b) / ((0.001 + dsq) * (1.0 + a * dsq ** b))
                else:
                    coeff = 0.0
                for d in range(dim):
                    if coeff > 0.0:
                        g = coeff * (emb[j, d] - emb[c, d])
                        if g > GRAD_CLIP:
                            g = GRAD_CLIP
                        elif g < -GRAD_CLIP:
                            g = -GRAD_CLIP
                    else:
                        g = GRAD_CLIP
                    emb[j, d] += alpha * g
            next_neg[e] += n_neg * epn[e]
    return emb


def optimize_layout(graph: FuzzyGraph, init: np.ndarray, config: EmbeddingConfig,
                    a: Optional[float] = None, b: Optional[float] = None) -> np.ndarray:
    """SGD layout pass: attraction on sampled edges, repulsion via negatives."""
    if a is None or b is None:
        a, b = fit_curve(config.min_dist)
    n_epochs = config.n_epochs
    if n_epochs is None:
        n_epochs = 500 if graph.n < 10000 else 200
    emb = np.array(init, dtype=np.float64, copy=True)
    if n_epochs == 0 or graph.rows.size == 0:
        return emb
    eps = make_epochs_per_sample(graph.weights, n_epochs)
    return _layout_kernel(
        emb,
        graph.rows.astype(np.int64),
        graph.cols.astype(np.int64),
        eps.astype(np.float64),
        float(a), float(b), 1.0,
        int(n_epochs), float(config.learning_rate),
        float(config.negative_sample_rate),
        np.uint64(config.seed & 0xFFFFFFFFFFFFFFFF),
    )


def umap(data: np.ndarray, config: EmbeddingConfig = EmbeddingConfig()) -> UmapResult:
    """Full pipeline: kNN -> fuzzy graph -> spectral init -> SGD layout."""
    X = np.asarray(data, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise TooFewPoints(f"need at least 2 points, got {n}")
    if config.metric != "euclidean":
        raise ValueError(f"unsupported metric {config.metric!r}")
    warnings: list[str] = []
    k = config.n_neighbors
    if k >= n:
        k = n - 1
        warnings.append(f"n_neighbors clamped from {config.n_neighbors} to {k}")
    idx, dists = knn_exact(X, k)
    graph = fuzzy_simplicial_set(idx, dists)
    init, fallback = spectral_init(graph, config.n_components, config.seed)
    if fallback:
        warnings.append("graph disconnected: random init fallback")
    coords = optimize_layout(graph, init, config)
    return UmapResult(coords=coords, spectral_fallback=fallback, warnings=warnings)


class UMAP(BaseEstimator):
    """sklearn-style wrapper around the functional pipeline.

    Only fit/fit_transform are offered; transforming new points into an
    existing embedding is out of scope.
    """

    def __init__(self, n_neighbors=15, min_dist=0.1, n_components=2,
                 metric="euclidean", n_epochs=None, learning_rate=1.0,
                 negative_sample_rate=5, random_state=0):
        self.n_neighbors = n_neighbors
        self.min_dist = min_dist
        self.n_components = n_components
        self.metric = metric
        self.n_epochs = n_epochs
        self.learning_rate = learning_rate
        self.negative_sample_rate = negative_sample_rate
        self.random_state = random_state

    def _config(self) -> EmbeddingConfig:
        return EmbeddingConfig(
            n_neighbors=self.n_neighbors, min_dist=self.min_dist,
            n_components=self.n_components, metric=self.metric,
            n_epochs=self.n_epochs, learning_rate=self.learning_rate,
            negative_sample_rate=self.negative_sample_rate,
            seed=self.random_state)

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        result = umap(X, self._config())
        self.embedding_ = result.coords
        self.spectral_fallback_ = result.spectral_fallback
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_
