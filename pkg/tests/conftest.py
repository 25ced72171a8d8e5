"""Shared fixtures.

Two generated corpora back the suite: a session-scoped one at the full
demo scale (5k+ sentences) for the end-to-end and acceptance tests, and a
small one for CLI round-trips where speed matters more than scale.
"""

from __future__ import annotations

import json
from types import SimpleNamespace

import numpy as np
import pytest

from pairmine import demo
from pairmine.config import parse_config
from pairmine.corpus import ingest
from pairmine.pipeline import (
    load_corpus,
    load_embeddings,
    load_indexes,
    stage_embed,
    stage_index,
    stage_ingest,
)
from pairmine.vindex.ivf import build
from pairmine.vindex.pca import PcaTransform

SMALL_DOCS = 120

TINY_DOC_A = (
    "Blue whales swim across the cold ocean. "
    "Sharks hunt near the warm reef today. "
    "The cold ocean holds many blue whales."
)
TINY_DOC_B = (
    "Blue whales swim across the cold ocean. "
    "Traders sell fresh fruit in the market."
)


@pytest.fixture()
def tiny_stack(tmp_path):
    """Five sentences, one of them a cross-document text duplicate, plus
    hand-placed 2-d vectors and a single-cell exact index."""
    path = tmp_path / "docs.jsonl"
    with open(path, "w") as fh:
        fh.write(json.dumps({"id": "a", "text": TINY_DOC_A, "source": "s"}) + "\n")
        fh.write(json.dumps({"id": "b", "text": TINY_DOC_B, "source": "s"}) + "\n")
    corpus = ingest(path, "generic")
    assert len(corpus) == 5
    assert corpus.sentence(3).text == corpus.sentence(0).text
    vectors = np.array(
        [[1.0, 0.0], [10.0, 0.0], [1.5, 0.0], [1.0, 0.1], [20.0, 20.0]],
        dtype=np.float32,
    )
    pca = PcaTransform(mean=np.zeros(2), projection=np.eye(2), rotation=np.eye(2))
    index = build([(i, vectors[i]) for i in range(5)], pca, np.zeros((1, 2)))
    return corpus, vectors, index


@pytest.fixture(scope="session")
def demo_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo5k")
    manifest = demo.generate(out, seed=7, n_docs=556)
    assert manifest["sentences"] >= 5000
    return out


@pytest.fixture(scope="session")
def demo_cfg(demo_dir):
    return parse_config(demo_dir / "config.toml")


@pytest.fixture(scope="session")
def demo_stack(demo_cfg):
    """Corpus, embeddings, and indexes for the 5k fixture, built once."""
    stage_ingest(demo_cfg)
    stage_embed(demo_cfg)
    stage_index(demo_cfg)
    return SimpleNamespace(
        cfg=demo_cfg,
        corpus=load_corpus(demo_cfg),
        matrix=load_embeddings(demo_cfg),
        indexes=load_indexes(demo_cfg),
    )


@pytest.fixture(scope="module")
def small_demo(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo-small")
    demo.generate(out, seed=7, n_docs=SMALL_DOCS)
    return out
