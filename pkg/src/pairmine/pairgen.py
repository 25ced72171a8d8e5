"""Sim-protocol candidate generation: turn retrieval hits into scored
(premise, hypothesis) pairs via eight reranking features, then select the
top N% of the pooled, deduplicated candidates.

The retrieval pool for a query is the concatenation of per-index top-K
lists. Candidate features are computed once per (query, hit) pair in a
MiningContext; a mining run with given parameters is then pure array work,
which keeps repeated tuning trials cheap.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Corpus, Document, Sentence, sample_queries
from .embed import nonzero_rows
from .errors import ArgumentError
from .text import normalize_token, tokens
from .vindex import IvfIndex, search

FEATURE_NAMES = (
    "sim_score",
    "word_types",
    "noun_phrase",
    "subjects",
    "named_entity",
    "time",
    "wiki_article",
    "wiki_link",
)

ORIGIN_SIM = "sim"
ORIGIN_TRANSLATE = "translate"
ORIGIN_WRITTEN = "written"


@dataclass(frozen=True)
class LingAnnotation:
    token_types: frozenset[str]
    noun_phrases: frozenset[str] = frozenset()
    subject_spans: frozenset[str] = frozenset()
    named_entities: frozenset[str] = frozenset()
    link_tokens: frozenset[str] = frozenset()


@dataclass(frozen=True)
class FeatureVector:
    sim_score: float
    word_types: float
    noun_phrase: float
    subjects: float
    named_entity: float
    time: float
    wiki_article: float
    wiki_link: float

    @classmethod
    def from_array(cls, row: np.ndarray) -> "FeatureVector":
        return cls(*(float(v) for v in row))

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES], dtype=np.float64)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in FEATURE_NAMES}


@dataclass
class CandidatePair:
    pair_id: str
    premise_id: str
    hypothesis_id: str
    premise_text: str
    hypothesis_text: str
    origin: str
    features: FeatureVector | None = None
    score: float | None = None
    label: str | None = None  # designated label for written pairs

    def to_json(self) -> str:
        record = {
            "pair_id": self.pair_id,
            "premise_id": self.premise_id,
            "hypothesis_id": self.hypothesis_id,
            "premise_text": self.premise_text,
            "hypothesis_text": self.hypothesis_text,
            "origin": self.origin,
        }
        if self.features is not None:
            record["features"] = self.features.as_dict()
        if self.score is not None:
            record["score"] = self.score
        if self.label is not None:
            record["label"] = self.label
        return json.dumps(record, sort_keys=False)


@dataclass(frozen=True)
class MiningParams:
    weights: tuple[float, ...]
    K: int
    N: float

    def __post_init__(self):
        if len(self.weights) != len(FEATURE_NAMES):
            raise ArgumentError(f"expected {len(FEATURE_NAMES)} weights")
        if self.K < 1:
            raise ArgumentError("K must be >= 1")
        if not 0 < self.N <= 100:
            raise ArgumentError("N must be in (0, 100]")

    def to_dict(self) -> dict:
        return {"weights": list(self.weights), "K": self.K, "N": self.N}

    @classmethod
    def from_dict(cls, raw: dict) -> "MiningParams":
        return cls(weights=tuple(raw["weights"]), K=int(raw["K"]), N=float(raw["N"]))


def normalized_text(text: str) -> str:
    return " ".join(tokens(text))


def proportion_seen(query_items: frozenset | set, retrieved_items: frozenset | set) -> float:
    """|query ∩ retrieved| / |query|, with 0 for an empty query set."""
    if not query_items:
        return 0.0
    return len(query_items & retrieved_items) / len(query_items)


class HeuristicAnnotations:
    """Dependency-free fallback annotation source.

    Named entities are maximal runs of capitalized tokens excluding the
    sentence-initial position; link tokens are the document's hyperlink
    tokens present in the sentence. Noun phrases and subject spans are not
    derivable without a parser and stay empty (their features read 0).
    """

    def annotation(self, sent: Sentence, doc: Document) -> LingAnnotation:
        return LingAnnotation(
            token_types=sent.token_types,
            named_entities=frozenset(_capitalized_runs(sent.text)),
            link_tokens=doc.hyperlink_tokens & sent.token_types,
        )


class SidecarAnnotations:
    """Annotations precomputed by an external NLP tool.

    JSONL rows: {"sent_id": int, "noun_phrases": [...], "subjects": [...],
    "entities": [...]}. Token and link sets still come from the corpus;
    sentences missing from the sidecar get empty parse-derived sets.
    """

    def __init__(self, path):
        self._rows: dict[int, dict] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                self._rows[int(row["sent_id"])] = row

    @staticmethod
    def _norm_set(values) -> frozenset[str]:
        out = set()
        for value in values or []:
            phrase = " ".join(t for t in (normalize_token(p) for p in str(value).split()) if t)
            if phrase:
                out.add(phrase)
        return frozenset(out)

    def annotation(self, sent: Sentence, doc: Document) -> LingAnnotation:
        row = self._rows.get(sent.sent_id, {})
        return LingAnnotation(
            token_types=sent.token_types,
            noun_phrases=self._norm_set(row.get("noun_phrases")),
            subject_spans=self._norm_set(row.get("subjects")),
            named_entities=self._norm_set(row.get("entities")),
            link_tokens=doc.hyperlink_tokens & sent.token_types,
        )


def _capitalized_runs(text: str) -> list[str]:
    raw = text.split()
    runs: list[str] = []
    current: list[str] = []
    for i, tok in enumerate(raw):
        stripped = tok.lstrip("\"'([{‘“")
        capital = bool(stripped) and stripped[0].isalpha() and stripped[0].isupper()
        if capital and i > 0:
            current.append(tok)
        else:
            if current:
                runs.append(current)
                current = []
    if current:
        runs.append(current)
    out = []
    for run in runs:
        phrase = " ".join(t for t in (normalize_token(p) for p in run) if t)
        if phrase:
            out.append(phrase)
    return out


def extract_features(
    q_sent: Sentence,
    q_ann: LingAnnotation,
    q_doc: Document,
    r_sent: Sentence,
    r_ann: LingAnnotation,
    r_doc: Document,
    distance: float,
    profile: str,
) -> FeatureVector:
    """The eight reranking features for one (query, retrieved) pair.

    sim_score here is the raw negated squared-L2 distance; mining rescales
    it to [0, 1] over the run. Profile-inapplicable features are fixed at 0.
    """
    news = profile == "news"
    wiki = profile == "wiki"
    time = 0.0
    if news and q_doc.date is not None and r_doc.date is not None:
        time = 1.0 if q_doc.date == r_doc.date else 0.0
    article = 0.0
    if wiki and q_doc.article_id is not None and r_doc.article_id is not None:
        article = 1.0 if q_doc.article_id == r_doc.article_id else 0.0
    return FeatureVector(
        sim_score=-float(distance),
        word_types=proportion_seen(q_ann.token_types, r_ann.token_types),
        noun_phrase=proportion_seen(q_ann.noun_phrases, r_ann.noun_phrases),
        subjects=proportion_seen(q_ann.subject_spans, r_ann.subject_spans),
        named_entity=proportion_seen(q_ann.named_entities, r_ann.named_entities),
        time=time,
        wiki_article=article,
        wiki_link=proportion_seen(q_ann.link_tokens, r_ann.token_types) if wiki else 0.0,
    )


def score(features: FeatureVector | np.ndarray, weights: Sequence[float]) -> float:
    """Weighted sum over the fixed feature ordering."""
    row = features.as_array() if isinstance(features, FeatureVector) else np.asarray(features)
    if len(weights) != len(FEATURE_NAMES):
        raise ArgumentError(f"expected {len(FEATURE_NAMES)} weights")
    return float(np.dot(row, np.asarray(weights, dtype=np.float64)))


def select(pairs: list[CandidatePair], N: float) -> list[CandidatePair]:
    """Global top-N% selection.

    Exact and orientation-reversed text duplicates are removed first (the
    earliest pair_id survives); survivors are sorted by descending score
    with ascending pair_id as tie-break, and the first
    max(1, floor(N/100 * survivors)) are returned.
    """
    if not 0 < N <= 100:
        raise ArgumentError("N must be in (0, 100]")
    if not pairs:
        return []
    if any(p.score is None for p in pairs):
        raise ArgumentError("all pairs must be scored before selection")
    kept: dict[tuple[str, str], CandidatePair] = {}
    for pair in sorted(pairs, key=lambda p: p.pair_id):
        p_norm = normalized_text(pair.premise_text)
        h_norm = normalized_text(pair.hypothesis_text)
        key = (p_norm, h_norm) if p_norm <= h_norm else (h_norm, p_norm)
        if key not in kept:
            kept[key] = pair
    survivors = sorted(kept.values(), key=lambda p: (-p.score, p.pair_id))
    take = max(1, math.floor(N / 100.0 * len(survivors)))
    return survivors[:take]


# --- mining over a prepared context -----------------------------------------


@dataclass
class CandidateBlock:
    """Top-k_cap hits of one query against one index."""

    ids: np.ndarray        # int64[m] hit sent_ids
    dists: np.ndarray      # float64[m]
    self_mask: np.ndarray  # bool[m], True where the hit is the query itself
    features: np.ndarray   # float64[m, 8], sim column holds -distance


@dataclass
class MiningContext:
    """Everything a mining run needs that does not depend on MiningParams."""

    corpus: Corpus
    query_ids: list[int]
    blocks: list[list[CandidateBlock]]  # per query, per index
    k_cap: int
    seed: int
    text_keys: dict[int, int] = field(default_factory=dict)  # sent_id -> interned text id

    def pair_id(self, qid: int, hid: int) -> str:
        return f"sim-q{qid:07d}-h{hid:07d}"


def prepare(
    corpus: Corpus,
    vectors: np.ndarray,
    indexes: Sequence[IvfIndex],
    n_queries: int,
    k_cap: int,
    nprobe: int,
    seed: int,
    annotations=None,
) -> MiningContext:
    """Sample queries, retrieve top-k_cap per index, featurize every hit."""
    if annotations is None:
        annotations = HeuristicAnnotations()
    eligible = nonzero_rows(vectors)
    query_ids = sample_queries(corpus, n_queries, seed, eligible=eligible)

    ann_cache: dict[int, LingAnnotation] = {}
    norm_cache: dict[int, str] = {}

    def ann(sent_id: int) -> LingAnnotation:
        got = ann_cache.get(sent_id)
        if got is None:
            sent = corpus.sentence(sent_id)
            got = annotations.annotation(sent, corpus.document_for(sent))
            ann_cache[sent_id] = got
        return got

    def norm(sent_id: int) -> str:
        got = norm_cache.get(sent_id)
        if got is None:
            got = normalized_text(corpus.sentence(sent_id).text)
            norm_cache[sent_id] = got
        return got

    interned: dict[str, int] = {}
    text_keys: dict[int, int] = {}

    def text_key(sent_id: int) -> int:
        tid = text_keys.get(sent_id)
        if tid is None:
            tid = interned.setdefault(norm(sent_id), len(interned))
            text_keys[sent_id] = tid
        return tid

    blocks: list[list[CandidateBlock]] = []
    for qid in query_ids:
        q_sent = corpus.sentence(qid)
        q_doc = corpus.document_for(q_sent)
        q_ann = ann(qid)
        q_key = text_key(qid)
        per_index: list[CandidateBlock] = []
        for index in indexes:
            if index.n_total == 0:
                per_index.append(
                    CandidateBlock(
                        ids=np.empty(0, dtype=np.int64),
                        dists=np.empty(0, dtype=np.float64),
                        self_mask=np.empty(0, dtype=bool),
                        features=np.empty((0, len(FEATURE_NAMES))),
                    )
                )
                continue
            hits = search(index, vectors[qid], k_cap, min(nprobe, index.n_lists))
            m = len(hits)
            ids = np.fromiter((h.sent_id for h in hits), dtype=np.int64, count=m)
            dists = np.fromiter((h.distance for h in hits), dtype=np.float64, count=m)
            self_mask = np.zeros(m, dtype=bool)
            feats = np.empty((m, len(FEATURE_NAMES)), dtype=np.float64)
            for i, hit in enumerate(hits):
                hid = hit.sent_id
                self_mask[i] = hid == qid or text_key(hid) == q_key
                r_sent = corpus.sentence(hid)
                feats[i] = extract_features(
                    q_sent,
                    q_ann,
                    q_doc,
                    r_sent,
                    ann(hid),
                    corpus.document_for(r_sent),
                    hit.distance,
                    corpus.profile,
                ).as_array()
            per_index.append(
                CandidateBlock(ids=ids, dists=dists, self_mask=self_mask, features=feats)
            )
        blocks.append(per_index)
    return MiningContext(
        corpus=corpus,
        query_ids=list(query_ids),
        blocks=blocks,
        k_cap=k_cap,
        seed=seed,
        text_keys=text_keys,
    )


def _pool(ctx: MiningContext, K: int):
    """Pooled candidate arrays for retrieval depth K: per query and index,
    the top-K prefix with self-matches dropped."""
    if K > ctx.k_cap:
        raise ArgumentError(f"K={K} exceeds the prepared retrieval cap {ctx.k_cap}")
    q_parts, h_parts, f_parts = [], [], []
    for qid, per_index in zip(ctx.query_ids, ctx.blocks):
        for block in per_index:
            m = min(K, block.ids.shape[0])
            if m == 0:
                continue
            keep = ~block.self_mask[:m]
            if not keep.any():
                continue
            hids = block.ids[:m][keep]
            q_parts.append(np.full(hids.shape[0], qid, dtype=np.int64))
            h_parts.append(hids)
            f_parts.append(block.features[:m][keep])
    if not q_parts:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, np.empty((0, len(FEATURE_NAMES)))
    return np.concatenate(q_parts), np.concatenate(h_parts), np.vstack(f_parts)


def rescale_sim(features: np.ndarray) -> np.ndarray:
    """Min-max rescale the raw sim column to [0, 1] over the current run;
    a degenerate (constant) column maps to 0.5."""
    out = features.copy()
    if out.shape[0] == 0:
        return out
    col = out[:, 0]
    lo, hi = float(col.min()), float(col.max())
    out[:, 0] = 0.5 if hi == lo else (col - lo) / (hi - lo)
    return out


def mine_arrays(ctx: MiningContext, params: MiningParams):
    """Fast-path mining: returns (qids, hids, scores, features) of the
    selected pairs, ordered by descending score then ascending pair id."""
    qids, hids, feats = _pool(ctx, params.K)
    if qids.shape[0] == 0:
        return qids, hids, np.empty(0), np.empty((0, len(FEATURE_NAMES)))
    feats = rescale_sim(feats)
    scores = feats @ np.asarray(params.weights, dtype=np.float64)

    # dedup on unordered normalized-text keys, earliest (qid, hid) kept
    qkeys = np.fromiter((ctx.text_keys[int(q)] for q in qids), dtype=np.int64, count=len(qids))
    hkeys = np.fromiter((ctx.text_keys[int(h)] for h in hids), dtype=np.int64, count=len(hids))
    lo = np.minimum(qkeys, hkeys)
    hi = np.maximum(qkeys, hkeys)
    by_id = np.lexsort((hids, qids))
    pair_key = lo[by_id] * (hi.max() + 1) + hi[by_id]
    _, first_pos = np.unique(pair_key, return_index=True)
    survivors = by_id[np.sort(first_pos)]

    order = np.lexsort((hids[survivors], qids[survivors], -scores[survivors]))
    survivors = survivors[order]
    take = max(1, math.floor(params.N / 100.0 * survivors.shape[0]))
    chosen = survivors[:take]
    return qids[chosen], hids[chosen], scores[chosen], feats[chosen]


def mine(ctx: MiningContext, params: MiningParams) -> list[CandidatePair]:
    """Run the Sim pipeline for one parameter setting; deterministic for a
    fixed context (seed) and params."""
    qids, hids, scores, feats = mine_arrays(ctx, params)
    pairs = []
    for qid, hid, s, row in zip(qids, hids, scores, feats):
        qid, hid = int(qid), int(hid)
        pairs.append(
            CandidatePair(
                pair_id=ctx.pair_id(qid, hid),
                premise_id=str(qid),
                hypothesis_id=str(hid),
                premise_text=ctx.corpus.sentence(qid).text,
                hypothesis_text=ctx.corpus.sentence(hid).text,
                origin=ORIGIN_SIM,
                features=FeatureVector.from_array(row),
                score=float(s),
            )
        )
    return pairs


def write_pairs_jsonl(path, pairs: list[CandidatePair], header: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(json.dumps({"_provenance": header}, sort_keys=True) + "\n")
        for pair in pairs:
            fh.write(pair.to_json() + "\n")


def read_pairs_jsonl(path) -> list[CandidatePair]:
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            if "_provenance" in row:
                continue
            features = None
            if "features" in row:
                features = FeatureVector(**row["features"])
            pairs.append(
                CandidatePair(
                    pair_id=row["pair_id"],
                    premise_id=row["premise_id"],
                    hypothesis_id=row["hypothesis_id"],
                    premise_text=row["premise_text"],
                    hypothesis_text=row["hypothesis_text"],
                    origin=row["origin"],
                    features=features,
                    score=row.get("score"),
                    label=row.get("label"),
                )
            )
    return pairs
