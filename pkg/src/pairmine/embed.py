"""Bag-of-words sentence embeddings from a pretrained word-vector table.

A sentence vector is the arithmetic mean of its in-vocabulary token vectors
(tokens counted with multiplicity). Sentences with no in-vocabulary token
get the zero vector and are excluded from indexing and query sampling.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import VectorParseError
from .text import tokens

_CACHE_MAGIC = b"PMEMBED1"


@dataclass
class VectorStore:
    dim: int
    table: dict[str, np.ndarray]
    duplicate_rows: int = 0

    def __contains__(self, token: str) -> bool:
        return token in self.table


@dataclass(frozen=True)
class SentenceVector:
    values: np.ndarray
    oov_fraction: float

    @property
    def is_zero(self) -> bool:
        return self.oov_fraction >= 1.0


def load_vectors(path) -> VectorStore:
    """Parse a text vector file: header "count dim", then "token v1 .. vdim".

    Duplicate tokens: last row wins, occurrences counted. Any row with the
    wrong number of values (or non-numeric values) is a parse error naming
    the line.
    """
    table: dict[str, np.ndarray] = {}
    duplicates = 0
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise VectorParseError("expected header 'count dim'", line_no=1)
        try:
            dim = int(header[1])
        except ValueError:
            raise VectorParseError("non-integer dimension in header", line_no=1) from None
        if dim <= 0:
            raise VectorParseError("dimension must be positive", line_no=1)
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise VectorParseError(
                    f"expected {dim} values, found {len(parts) - 1}", line_no=line_no
                )
            try:
                vec = np.array([float(v) for v in parts[1:]], dtype=np.float32)
            except ValueError:
                raise VectorParseError("non-numeric vector component", line_no=line_no) from None
            if parts[0] in table:
                duplicates += 1
            table[parts[0]] = vec
    return VectorStore(dim=dim, table=table, duplicate_rows=duplicates)


def encode(text: str, store: VectorStore) -> SentenceVector:
    """Mean of in-vocabulary token vectors; all-OOV yields the zero vector."""
    toks = tokens(text)
    acc = np.zeros(store.dim, dtype=np.float64)
    hits = 0
    for tok in toks:
        vec = store.table.get(tok)
        if vec is not None:
            acc += vec
            hits += 1
    if hits == 0:
        return SentenceVector(values=np.zeros(store.dim, dtype=np.float32), oov_fraction=1.0)
    oov = (len(toks) - hits) / len(toks)
    return SentenceVector(values=(acc / hits).astype(np.float32), oov_fraction=oov)


def normalize(vec: SentenceVector) -> SentenceVector:
    """Scale to unit L2 norm; the zero vector passes through unchanged."""
    if vec.is_zero:
        return vec
    norm = float(np.linalg.norm(vec.values.astype(np.float64)))
    if norm == 0.0:
        return SentenceVector(values=vec.values, oov_fraction=1.0)
    values = (vec.values.astype(np.float64) / norm).astype(np.float32)
    return SentenceVector(values=values, oov_fraction=vec.oov_fraction)


def encode_corpus(corpus, store: VectorStore, unit_norm: bool = True) -> np.ndarray:
    """Encode every sentence; rows align with dense sent_ids.

    Zero rows mark all-OOV sentences (left unnormalized by convention).
    """
    out = np.zeros((len(corpus.sentences), store.dim), dtype=np.float32)
    for sent in corpus.sentences:
        vec = encode(sent.text, store)
        if unit_norm:
            vec = normalize(vec)
        out[sent.sent_id] = vec.values
    return out


def nonzero_rows(matrix: np.ndarray) -> np.ndarray:
    """sent_ids whose embedding is not the zero vector."""
    return np.flatnonzero(np.any(matrix != 0.0, axis=1))


def save_cache(path, matrix: np.ndarray) -> None:
    """Binary embedding cache: magic, count u64, dim u64, float32 rows (LE)."""
    mat = np.ascontiguousarray(matrix, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<QQ", mat.shape[0], mat.shape[1]))
        fh.write(mat.tobytes())


def load_cache(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _CACHE_MAGIC:
            raise VectorParseError("bad embedding cache magic", line_no=0)
        count, dim = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(count * dim * 4), dtype="<f4")
    return data.reshape(count, dim).copy()
