"""PCA-with-random-rotation dimensionality reduction (the "PCAR" transform).

Mean-centered PCA onto the top components by explained variance, followed
by a seeded random orthogonal rotation of the reduced space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError, RankDeficiencyError


@dataclass
class PcaTransform:
    mean: np.ndarray        # (d_in,)
    projection: np.ndarray  # (d_out, d_in), rows orthonormal
    rotation: np.ndarray    # (d_out, d_out), orthogonal
    explained_variance: np.ndarray | None = None

    @property
    def d_in(self) -> int:
        return self.mean.shape[0]

    @property
    def d_out(self) -> int:
        return self.projection.shape[0]

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        """Reduce (n, d_in) float rows to (n, d_out) float32."""
        x = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        reduced = (x - self.mean) @ self.projection.T @ self.rotation.T
        return reduced.astype(np.float32)


def random_rotation(d: int, seed: int) -> np.ndarray:
    """Haar-ish orthogonal matrix: QR of a seeded Gaussian, sign-fixed."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def train_pca(seed_vectors: np.ndarray, d_out: int, seed: int) -> PcaTransform:
    """Fit the transform on seed vectors.

    Raises RankDeficiencyError when the centered data has rank < d_out.
    Component signs are canonicalized (largest-magnitude entry positive) so
    training is deterministic across LAPACK builds.
    """
    x = np.asarray(seed_vectors, dtype=np.float64)
    if x.ndim != 2:
        raise ArgumentError("seed vectors must be a 2-D array")
    n, d_in = x.shape
    if not 1 <= d_out <= d_in:
        raise ArgumentError(f"d_out must be in [1, {d_in}], got {d_out}")
    mean = x.mean(axis=0)
    centered = x - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    tol = max(n, d_in) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    if rank < d_out:
        raise RankDeficiencyError(
            f"seed data has rank {rank}, need at least {d_out} independent vectors"
        )
    components = vt[:d_out]
    flip = np.sign(components[np.arange(d_out), np.argmax(np.abs(components), axis=1)])
    components = components * flip[:, None]
    variance = (s[:d_out] ** 2) / max(n - 1, 1)
    return PcaTransform(
        mean=mean,
        projection=components,
        rotation=random_rotation(d_out, seed),
        explained_variance=variance,
    )
