"""Pure-NumPy kernels: the fallback used when the compiled core is absent.

Both backends implement the same contract:

- distances are squared L2, accumulated in float64 from float32 inputs;
- result ordering breaks distance ties by ascending external id.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def assign_nearest(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest centroid per point; ties resolve to the lowest centroid index.

    Returns (labels int64[n], sqdists float64[n]).
    """
    x = points.astype(np.float64, copy=False)
    c = centroids.astype(np.float64, copy=False)
    x2 = np.einsum("ij,ij->i", x, x)
    c2 = np.einsum("ij,ij->i", c, c)
    d = x2[:, None] + c2[None, :] - 2.0 * (x @ c.T)
    np.maximum(d, 0.0, out=d)
    labels = np.argmin(d, axis=1)  # argmin returns the first minimum
    dists = d[np.arange(d.shape[0]), labels]
    return labels.astype(np.int64), dists


def scan_lists(
    query: np.ndarray,
    vecs: np.ndarray,
    ids: np.ndarray,
    starts: np.ndarray,
    ends: np.ndarray,
    k: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Top-k scan over row ranges [starts[i], ends[i]) of `vecs`.

    Returns (ids int64[m], sqdists float64[m]) with m = min(k, candidates),
    sorted by (distance, id) ascending.
    """
    ranges = [np.arange(s, e, dtype=np.int64) for s, e in zip(starts, ends) if e > s]
    if not ranges:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    cand = np.concatenate(ranges)
    diff = vecs[cand].astype(np.float64) - query.astype(np.float64)
    d = np.einsum("ij,ij->i", diff, diff)
    cid = ids[cand]
    order = np.lexsort((cid, d))[:k]
    return cid[order].astype(np.int64), d[order]
