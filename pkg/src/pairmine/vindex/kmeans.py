"""Lloyd k-means with k-means++ seeding.

Deterministic per seed: assignment always runs through the NumPy training
kernel so cluster training does not depend on which search backend is
compiled in. Empty clusters are re-seeded from the farthest point of the
largest cluster.
"""

from __future__ import annotations

import numpy as np

from .._kernels import assign_nearest_training
from ..errors import ArgumentError

MAX_ITERATIONS = 25
REL_TOLERANCE = 1e-4


def _kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = x[first]
    sqdist = np.einsum("ij,ij->i", x - centroids[0], x - centroids[0])
    for j in range(1, k):
        total = sqdist.sum()
        if total <= 0.0:
            # all remaining points coincide with chosen centroids
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=sqdist / total))
        centroids[j] = x[idx]
        new_d = np.einsum("ij,ij->i", x - centroids[j], x - centroids[j])
        np.minimum(sqdist, new_d, out=sqdist)
    return centroids


def _fix_empty_clusters(x: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> bool:
    """Re-seed empty clusters from the largest cluster's farthest point."""
    k = centroids.shape[0]
    counts = np.bincount(labels, minlength=k)
    changed = False
    taken: set[int] = set()
    for empty in np.flatnonzero(counts == 0):
        donor = int(np.argmax(counts))
        members = np.flatnonzero(labels == donor)
        members = np.array([m for m in members if m not in taken], dtype=np.int64)
        if members.size == 0:
            continue
        d = np.einsum("ij,ij->i", x[members] - centroids[donor], x[members] - centroids[donor])
        far = int(members[np.argmax(d)])
        centroids[empty] = x[far]
        labels[far] = empty
        counts[donor] -= 1
        counts[empty] += 1
        taken.add(far)
        changed = True
    return changed


def train_clusters(
    seed_vectors: np.ndarray,
    k: int,
    seed: int,
    max_iterations: int = MAX_ITERATIONS,
    tolerance: float = REL_TOLERANCE,
) -> np.ndarray:
    """Returns (k, d) float64 centroids after Lloyd convergence or the cap.

    Raises ArgumentError when k exceeds the number of distinct seed points.
    """
    x = np.asarray(seed_vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ArgumentError("seed vectors must be a non-empty 2-D array")
    distinct = np.unique(x, axis=0).shape[0]
    if k < 1 or k > distinct:
        raise ArgumentError(f"k must be in [1, {distinct}] (distinct points), got {k}")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp(x, k, rng)
    previous = np.inf
    for _ in range(max_iterations):
        labels, sqdists = assign_nearest_training(
            x.astype(np.float32), centroids.astype(np.float32)
        )
        if _fix_empty_clusters(x, centroids, labels):
            labels, sqdists = assign_nearest_training(
                x.astype(np.float32), centroids.astype(np.float32)
            )
        objective = float(sqdists.sum())
        for j in range(k):
            members = labels == j
            if members.any():
                centroids[j] = x[members].mean(axis=0)
        if previous < np.inf and previous - objective <= tolerance * max(previous, 1e-12):
            break
        previous = objective
    return centroids


def kmeans_objective(x: np.ndarray, centroids: np.ndarray) -> float:
    _, sqdists = assign_nearest_training(
        np.asarray(x, dtype=np.float32), np.asarray(centroids, dtype=np.float32)
    )
    return float(sqdists.sum())
