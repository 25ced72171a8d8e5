"""Inverted-file index: k-means cells over PCA-reduced vectors, exact
search within the probed cells.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .._kernels import assign_nearest_training, scan_lists
from ..errors import ArgumentError
from .pca import PcaTransform

DEFAULT_NPROBE = 16


def cluster_count(n_seed: int) -> int:
    """Number of inverted lists for a given seed-sentence count.

    Flooring to the hundred below n_seed/100, clamped to a minimum of 100.
    """
    if n_seed < 1:
        raise ArgumentError("n_seed must be >= 1")
    return max(100, 100 * (n_seed // 10000))


@dataclass(frozen=True)
class SearchHit:
    sent_id: int
    distance: float  # squared L2 in reduced space


@dataclass
class IvfIndex:
    """Flattened inverted lists: rows of `vecs` are grouped per cell, cell c
    spanning rows offsets[c]:offsets[c+1]; within a cell rows are ordered by
    ascending sent_id."""

    pca: PcaTransform
    centroids: np.ndarray  # (x, d_out) float32
    offsets: np.ndarray    # (x+1,) int64
    ids: np.ndarray        # (n_total,) int64
    vecs: np.ndarray       # (n_total, d_out) float32

    @property
    def n_lists(self) -> int:
        return self.centroids.shape[0]

    @property
    def n_total(self) -> int:
        return int(self.ids.shape[0])

    def list_sizes(self) -> np.ndarray:
        return np.diff(self.offsets)


def build(
    vectors: Iterable[tuple[int, np.ndarray]],
    pca: PcaTransform,
    centroids: np.ndarray,
) -> IvfIndex:
    """Assign each reduced vector to its nearest centroid's list."""
    items = list(vectors)
    x = centroids.shape[0]
    cents32 = np.ascontiguousarray(centroids, dtype=np.float32)
    if not items:
        return IvfIndex(
            pca=pca,
            centroids=cents32,
            offsets=np.zeros(x + 1, dtype=np.int64),
            ids=np.empty(0, dtype=np.int64),
            vecs=np.empty((0, pca.d_out), dtype=np.float32),
        )
    ids = np.array([sid for sid, _ in items], dtype=np.int64)
    raw = np.stack([np.asarray(v) for _, v in items])
    reduced = pca.apply(raw)
    labels, _ = assign_nearest_training(reduced, cents32)
    # group by (cell, sent_id) for a deterministic layout
    order = np.lexsort((ids, labels))
    labels, ids, reduced = labels[order], ids[order], reduced[order]
    offsets = np.zeros(x + 1, dtype=np.int64)
    counts = np.bincount(labels, minlength=x)
    offsets[1:] = np.cumsum(counts)
    return IvfIndex(
        pca=pca,
        centroids=cents32,
        offsets=offsets,
        ids=np.ascontiguousarray(ids),
        vecs=np.ascontiguousarray(reduced, dtype=np.float32),
    )


def search(index: IvfIndex, query: np.ndarray, k: int, nprobe: int) -> list[SearchHit]:
    """Top-k by ascending reduced-space distance over the nprobe nearest
    cells; ties broken by ascending sent_id."""
    if k < 1:
        raise ArgumentError("k must be >= 1")
    if not 1 <= nprobe <= index.n_lists:
        raise ArgumentError(f"nprobe must be in [1, {index.n_lists}], got {nprobe}")
    q = index.pca.apply(np.asarray(query, dtype=np.float64))[0]
    cdiff = index.centroids.astype(np.float64) - q.astype(np.float64)
    cdist = np.einsum("ij,ij->i", cdiff, cdiff)
    probe = np.lexsort((np.arange(index.n_lists), cdist))[:nprobe]
    hit_ids, hit_d = scan_lists(
        q,
        index.vecs,
        index.ids,
        index.offsets[probe],
        index.offsets[probe + 1],
        k,
    )
    return [SearchHit(int(i), float(d)) for i, d in zip(hit_ids, hit_d)]


def merge_search(
    indexes: Sequence[IvfIndex], query: np.ndarray, k_per_index: int, nprobe: int
) -> list[SearchHit]:
    """Concatenated per-index top-k lists; no global re-sort (the reranker
    downstream consumes the whole pool)."""
    if not indexes:
        raise ArgumentError("at least one index required")
    hits: list[SearchHit] = []
    for index in indexes:
        if index.n_total == 0:
            continue
        hits.extend(search(index, query, k_per_index, min(nprobe, index.n_lists)))
    return hits
