"""Inverted-file vector index with PCA-rotation reduction."""

from .ivf import (
    DEFAULT_NPROBE,
    IvfIndex,
    SearchHit,
    build,
    cluster_count,
    merge_search,
    search,
)
from .io import IndexFormatError, load_index, save_index
from .kmeans import kmeans_objective, train_clusters
from .pca import PcaTransform, random_rotation, train_pca

__all__ = [
    "DEFAULT_NPROBE",
    "IvfIndex",
    "SearchHit",
    "IndexFormatError",
    "PcaTransform",
    "build",
    "cluster_count",
    "kmeans_objective",
    "load_index",
    "merge_search",
    "random_rotation",
    "save_index",
    "search",
    "train_clusters",
    "train_pca",
]
