"""Corpus ingestion: line-delimited JSON documents in, segmented sentences out.

Input schema, one JSON object per line:

    {"id": "...", "text": "...", "source": "...",
     "date": [2007, 3] | "2007-03",          # optional
     "article_id": "...",                     # optional
     "links": ["token", ...]}                 # optional

Malformed records are skipped and counted, never fatal.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ArgumentError, EmptyCorpusError
from .text import normalize_token, paragraphs, split_sentences, token_types

PROFILES = ("news", "wiki", "generic")

#: sentences with fewer normalized token types than this are dropped
MIN_TOKEN_TYPES = 3


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    source: str
    date: tuple[int, int] | None = None
    article_id: str | None = None
    hyperlink_tokens: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Sentence:
    sent_id: int
    doc_ref: str
    text: str
    token_types: frozenset[str]
    position: int
    is_lead_paragraph: bool


@dataclass
class Corpus:
    """Immutable after ingestion; sent_ids are dense 0..n-1."""

    profile: str
    sentences: list[Sentence] = field(default_factory=list)
    doc_index: dict[str, Document] = field(default_factory=dict)
    skipped_records: int = 0

    def __len__(self) -> int:
        return len(self.sentences)

    def sentence(self, sent_id: int) -> Sentence:
        return self.sentences[sent_id]

    def document_for(self, sent: Sentence) -> Document:
        return self.doc_index[sent.doc_ref]


def _parse_date(raw) -> tuple[int, int]:
    if isinstance(raw, str):
        year_s, month_s = raw.split("-", 1)
        year, month = int(year_s), int(month_s)
    else:
        year, month = int(raw[0]), int(raw[1])
    if not 1 <= month <= 12:
        raise ValueError(f"month out of range: {month}")
    return year, month


def parse_document(raw: dict) -> Document:
    """Raises on any schema violation; ingest turns that into a skip."""
    doc_id = str(raw["id"])
    text = raw["text"]
    if not isinstance(text, str) or not text.strip():
        raise ValueError("empty text")
    date = _parse_date(raw["date"]) if raw.get("date") is not None else None
    links = raw.get("links") or []
    link_tokens = frozenset(t for t in (normalize_token(str(x)) for x in links) if t)
    return Document(
        doc_id=doc_id,
        text=text,
        source=str(raw.get("source", "unknown")),
        date=date,
        article_id=str(raw["article_id"]) if raw.get("article_id") is not None else None,
        hyperlink_tokens=link_tokens,
    )


def segment(doc: Document, first_sent_id: int = 0) -> list[Sentence]:
    """Split a document into sentences and drop fragments.

    `position` indexes the raw split (before the token-type filter) so it
    reflects document structure; sent_ids number only the surviving
    sentences, starting at `first_sent_id`.
    """
    out: list[Sentence] = []
    sent_id = first_sent_id
    position = 0
    for p_idx, para in enumerate(paragraphs(doc.text)):
        for raw_sentence in split_sentences(para):
            types = token_types(raw_sentence)
            if len(types) >= MIN_TOKEN_TYPES:
                out.append(
                    Sentence(
                        sent_id=sent_id,
                        doc_ref=doc.doc_id,
                        text=raw_sentence,
                        token_types=types,
                        position=position,
                        is_lead_paragraph=(p_idx == 0),
                    )
                )
                sent_id += 1
            position += 1
    return out


def ingest(path, profile: str) -> Corpus:
    """Build a corpus from a JSONL file; skips and counts bad records."""
    if profile not in PROFILES:
        raise ArgumentError(f"unknown profile {profile!r}; expected one of {PROFILES}")
    corpus = Corpus(profile=profile)
    with open(path, "r", encoding="utf-8") as fh:
        lines: Iterable[str] = fh
        for line in lines:
            line = line.strip()
            if not line:
                continue
            try:
                doc = parse_document(json.loads(line))
                if doc.doc_id in corpus.doc_index:
                    raise ValueError(f"duplicate doc_id {doc.doc_id}")
            except (ValueError, KeyError, TypeError, IndexError):
                corpus.skipped_records += 1
                continue
            corpus.doc_index[doc.doc_id] = doc
    if not corpus.doc_index:
        raise EmptyCorpusError(f"no valid documents in {path}")
    for doc in corpus.doc_index.values():
        corpus.sentences.extend(segment(doc, first_sent_id=len(corpus.sentences)))
    return corpus


def sample_queries(
    corpus: Corpus, n: int, seed: int, eligible: Sequence[int] | None = None
) -> list[int]:
    """n distinct sent_ids, deterministic per seed.

    `eligible` restricts the pool (the mining pipeline excludes sentences
    whose embedding is the zero vector).
    """
    pool = sorted(eligible) if eligible is not None else list(range(len(corpus.sentences)))
    if n > len(pool):
        raise ArgumentError(f"cannot sample {n} queries from {len(pool)} sentences")
    return random.Random(seed).sample(pool, n)
