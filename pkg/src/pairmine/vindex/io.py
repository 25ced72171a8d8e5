"""Single-file binary persistence for an IvfIndex.

Layout (all integers little-endian u64, all floats little-endian f32):

    magic "PMIVFIDX" | version | d_in | d_out | x | n_total
    mean f32[d_in] | projection f32[d_out*d_in] | rotation f32[d_out*d_out]
    centroids f32[x*d_out]
    x times: m u64 | ids i64[m] | vecs f32[m*d_out]
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import PairmineError
from .ivf import IvfIndex
from .pca import PcaTransform

MAGIC = b"PMIVFIDX"
VERSION = 1


class IndexFormatError(PairmineError):
    pass


def _write_f32(fh, arr: np.ndarray) -> None:
    fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def _read(fh, n: int) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise IndexFormatError("truncated index file")
    return data


def save_index(path, index: IvfIndex) -> None:
    d_in, d_out = index.pca.d_in, index.pca.d_out
    x = index.n_lists
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQQQQ", VERSION, d_in, d_out, x, index.n_total))
        _write_f32(fh, index.pca.mean)
        _write_f32(fh, index.pca.projection)
        _write_f32(fh, index.pca.rotation)
        _write_f32(fh, index.centroids)
        for c in range(x):
            lo, hi = int(index.offsets[c]), int(index.offsets[c + 1])
            fh.write(struct.pack("<Q", hi - lo))
            fh.write(np.ascontiguousarray(index.ids[lo:hi], dtype="<i8").tobytes())
            _write_f32(fh, index.vecs[lo:hi])


def load_index(path) -> IvfIndex:
    with open(path, "rb") as fh:
        if _read(fh, 8) != MAGIC:
            raise IndexFormatError("bad magic; not a pairmine index file")
        version, d_in, d_out, x, n_total = struct.unpack("<QQQQQ", _read(fh, 40))
        if version != VERSION:
            raise IndexFormatError(f"unsupported index version {version}")
        mean = np.frombuffer(_read(fh, 4 * d_in), dtype="<f4").astype(np.float64)
        projection = (
            np.frombuffer(_read(fh, 4 * d_out * d_in), dtype="<f4")
            .astype(np.float64)
            .reshape(d_out, d_in)
        )
        rotation = (
            np.frombuffer(_read(fh, 4 * d_out * d_out), dtype="<f4")
            .astype(np.float64)
            .reshape(d_out, d_out)
        )
        centroids = (
            np.frombuffer(_read(fh, 4 * x * d_out), dtype="<f4").reshape(x, d_out).copy()
        )
        offsets = np.zeros(x + 1, dtype=np.int64)
        ids_parts = []
        vec_parts = []
        for c in range(x):
            (m,) = struct.unpack("<Q", _read(fh, 8))
            offsets[c + 1] = offsets[c] + m
            ids_parts.append(np.frombuffer(_read(fh, 8 * m), dtype="<i8"))
            vec_parts.append(
                np.frombuffer(_read(fh, 4 * m * d_out), dtype="<f4").reshape(m, d_out)
            )
        total = int(offsets[-1])
        if total != n_total:
            raise IndexFormatError(f"list sizes sum to {total}, header says {n_total}")
    ids = np.concatenate(ids_parts) if ids_parts else np.empty(0, dtype=np.int64)
    vecs = (
        np.concatenate(vec_parts)
        if vec_parts
        else np.empty((0, d_out), dtype=np.float32)
    )
    pca = PcaTransform(mean=mean, projection=projection, rotation=rotation)
    return IvfIndex(
        pca=pca,
        centroids=centroids,
        offsets=offsets,
        ids=np.ascontiguousarray(ids),
        vecs=np.ascontiguousarray(vecs, dtype=np.float32),
    )
