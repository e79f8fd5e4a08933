"""K-means with k-means++ seeding, plus clustering-quality metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils import check_array

from .errors import EmptyGroup, LengthMismatch, TooFewPoints


@dataclass(frozen=True)
class ClusterConfig:
    k: int = 10
    max_iters: int = 300
    tol: float = 1e-6
    seed: int = 0


@dataclass
class ClusterResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations: int
    inertia_history: list[float] = field(default_factory=list)


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    return np.maximum(d2, 0.0)


def _kmeanspp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    first = int(rng.integers(n))
    centers[0] = X[first]
    closest = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            pick = int(rng.integers(n))  # all points coincide with a center
        else:
            pick = int(rng.choice(n, p=closest / total))
        centers[c] = X[pick]
        closest = np.minimum(closest, ((X - centers[c]) ** 2).sum(axis=1))
    return centers


def _repair_empty(labels: np.ndarray, point_d2: np.ndarray, k: int) -> None:
    """Give each empty cluster the point farthest from its centroid."""
    while True:
        sizes = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(sizes == 0)
        if empty.size == 0:
            return
        candidates = np.flatnonzero(sizes[labels] > 1)
        far = candidates[int(np.argmax(point_d2[candidates]))]
        labels[far] = int(empty[0])
        point_d2[far] = 0.0


def kmeans(data: np.ndarray, config: ClusterConfig = ClusterConfig()) -> ClusterResult:
    """Lloyd iterations from a seeded k-means++ start.

    Converges when the max relative centroid movement drops below tol.
    Empty clusters claim the point currently farthest from its centroid.
    """
    X = np.asarray(data, dtype=np.float64)
    n = X.shape[0]
    k = config.k
    if n < k:
        raise TooFewPoints(f"n={n} < k={k}")
    rng = np.random.default_rng(config.seed)
    centers = _kmeanspp_init(X, k, rng)
    history: list[float] = []
    labels = np.zeros(n, dtype=np.int64)
    iterations = 0
    for iterations in range(1, config.max_iters + 1):
        d2 = _sq_dists(X, centers)
        labels = np.argmin(d2, axis=1)  # argmin ties to lowest centroid index
        point_d2 = d2[np.arange(n), labels]
        _repair_empty(labels, point_d2, k)
        history.append(float(point_d2.sum()))
        new_centers = np.empty_like(centers)
        for c in range(k):
            new_centers[c] = X[labels == c].mean(axis=0)
        move = np.linalg.norm(new_centers - centers, axis=1)
        rel = move / (np.linalg.norm(centers, axis=1) + 1e-12)
        centers = new_centers
        if rel.max() < config.tol:
            break

    # final assignment + mean so centroids are exact means of their points
    d2 = _sq_dists(X, centers)
    labels = np.argmin(d2, axis=1)
    point_d2 = d2[np.arange(n), labels]
    _repair_empty(labels, point_d2, k)
    for c in range(k):
        centers[c] = X[labels == c].mean(axis=0)
    d2 = _sq_dists(X, centers)
    inertia = float(d2[np.arange(n), labels].sum())
    history.append(inertia)
    return ClusterResult(labels=labels, centroids=centers, inertia=inertia,
                         iterations=iterations, inertia_history=history)


def adjusted_rand_index(labels_a: Sequence, labels_b: Sequence) -> float:
    """Standard chance-corrected Rand index; permutation invariant."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape:
        raise LengthMismatch(f"{a.shape} vs {b.shape}")
    n = a.size
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    contingency = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(contingency, (ai, bi), 1)

    def comb2(x):
        return x * (x - 1) / 2.0

    sum_ij = comb2(contingency.astype(float)).sum()
    sum_a = comb2(contingency.sum(axis=1).astype(float)).sum()
    sum_b = comb2(contingency.sum(axis=0).astype(float)).sum()
    total = comb2(float(n))
    expected = sum_a * sum_b / total if total > 0 else 0.0
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        return 1.0
    return float((sum_ij - expected) / (max_index - expected))


@dataclass
class GroupDistribution:
    counts: np.ndarray  # per-cluster counts
    dominant: int
    dominance_ratio: float
    size: int


def cluster_distribution(labels: Sequence[int], group_of_point: Sequence[Hashable],
                         k: int | None = None) -> dict:
    """Per-group histogram over clusters with the dominant cluster per group."""
    labels = np.asarray(labels, dtype=np.int64)
    groups = list(group_of_point)
    if labels.size != len(groups):
        raise LengthMismatch(f"{labels.size} labels vs {len(groups)} groups")
    if labels.size == 0:
        raise EmptyGroup("no points")
    n_clusters = int(k if k is not None else labels.max() + 1)
    out: dict = {}
    for g in dict.fromkeys(groups):  # first-seen order, deterministic
        member = labels[np.fromiter((x == g for x in groups), dtype=bool)]
        if member.size == 0:
            raise EmptyGroup(str(g))
        counts = np.bincount(member, minlength=n_clusters)
        dominant = int(np.argmax(counts))  # ties to lowest cluster id
        out[g] = GroupDistribution(
            counts=counts, dominant=dominant,
            dominance_ratio=float(counts[dominant] / member.size),
            size=int(member.size))
    return out


class KMeans(ClusterMixin, BaseEstimator):
    """sklearn-style wrapper around :func:`kmeans`."""

    def __init__(self, n_clusters=10, max_iter=300, tol=1e-6, random_state=0):
        self.n_clusters = n_clusters
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        result = kmeans(X, ClusterConfig(
            k=self.n_clusters, max_iters=self.max_iter,
            tol=self.tol, seed=self.random_state))
        self.labels_ = result.labels
        self.cluster_centers_ = result.centroids
        self.inertia_ = result.inertia
        self.n_iter_ = result.iterations
        return self

    def predict(self, X):
        X = check_array(X, dtype=np.float64)
        return np.argmin(_sq_dists(X, self.cluster_centers_), axis=1)
