"""Feature extraction, scoring, selection, and the sim mining path.

The end-to-end class checks the array fast path (mine_arrays) against an
independent reference built from the object-level pieces: per-query search,
extract_features, rescale, and select.
"""

import json

import numpy as np
import pytest

from pairmine import pairgen
from pairmine.corpus import Document, Sentence
from pairmine.errors import ArgumentError
from pairmine.pairgen import (
    FEATURE_NAMES,
    CandidatePair,
    FeatureVector,
    HeuristicAnnotations,
    MiningParams,
    SidecarAnnotations,
    extract_features,
    mine,
    mine_arrays,
    normalized_text,
    prepare,
    proportion_seen,
    read_pairs_jsonl,
    rescale_sim,
    score,
    select,
    write_pairs_jsonl,
)
from pairmine.vindex.ivf import search


def _sentence(sent_id, text, doc_ref="d", position=0, lead=True):
    from pairmine.text import token_types

    return Sentence(
        sent_id=sent_id,
        doc_ref=doc_ref,
        text=text,
        token_types=token_types(text),
        position=position,
        is_lead_paragraph=lead,
    )


class TestFeatureVector:
    def test_array_roundtrip_keeps_order(self):
        row = np.arange(8, dtype=np.float64)
        fv = FeatureVector.from_array(row)
        np.testing.assert_array_equal(fv.as_array(), row)
        assert list(fv.as_dict()) == list(FEATURE_NAMES)
        assert fv.sim_score == 0.0 and fv.wiki_link == 7.0


class TestMiningParams:
    def test_valid(self):
        p = MiningParams(weights=(1,) * 8, K=5, N=10.0)
        assert p.to_dict()["K"] == 5
        assert MiningParams.from_dict(p.to_dict()) == p

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"weights": (1.0,) * 7, "K": 5, "N": 10.0},
            {"weights": (1.0,) * 8, "K": 0, "N": 10.0},
            {"weights": (1.0,) * 8, "K": 5, "N": 0.0},
            {"weights": (1.0,) * 8, "K": 5, "N": 100.5},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ArgumentError):
            MiningParams(**kwargs)


def test_normalized_text():
    assert normalized_text('  "Hello,  World!"  ') == "hello world"
    assert normalized_text("...") == ""


class TestProportionSeen:
    def test_oracle_set_arithmetic(self):
        q = frozenset({"a", "b", "c", "d"})
        r = frozenset({"b", "d", "x"})
        assert proportion_seen(q, r) == len(q & r) / len(q) == 0.5

    def test_empty_query_is_zero(self):
        assert proportion_seen(frozenset(), frozenset({"a"})) == 0.0

    def test_full_overlap(self):
        s = frozenset({"a", "b"})
        assert proportion_seen(s, s | {"z"}) == 1.0


class TestCapitalizedRuns:
    def test_initial_position_excluded(self):
        runs = pairgen._capitalized_runs("Barack Obama visited Paris")
        assert runs == ["obama", "paris"]

    def test_multiword_run(self):
        runs = pairgen._capitalized_runs("He met Angela Merkel in Berlin today")
        assert runs == ["angela merkel", "berlin"]

    def test_leading_quote_stripped(self):
        runs = pairgen._capitalized_runs('They saw "Big Ben yesterday')
        assert runs == ["big ben"]

    def test_no_capitals(self):
        assert pairgen._capitalized_runs("all lower case words") == []


class TestAnnotationSources:
    def test_heuristic(self):
        doc = Document(
            doc_id="d", text="x", source="s", hyperlink_tokens=frozenset({"reef", "ocean"})
        )
        sent = _sentence(0, "Sharks visit Coral Reef near the reef")
        ann = HeuristicAnnotations().annotation(sent, doc)
        assert ann.named_entities == frozenset({"coral reef"})
        assert ann.link_tokens == frozenset({"reef"})
        assert ann.noun_phrases == frozenset()
        assert ann.subject_spans == frozenset()
        assert "sharks" in ann.token_types

    def test_sidecar(self, tmp_path):
        path = tmp_path / "ann.jsonl"
        rows = [
            {
                "sent_id": 0,
                "noun_phrases": ["the Blue Whale", "Cold ocean"],
                "subjects": ["Blue Whale"],
                "entities": ["Pacific"],
            }
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        side = SidecarAnnotations(path)
        doc = Document(doc_id="d", text="x", source="s", hyperlink_tokens=frozenset({"whale"}))
        sent = _sentence(0, "The blue whale swims in the cold ocean")
        ann = side.annotation(sent, doc)
        assert ann.noun_phrases == frozenset({"the blue whale", "cold ocean"})
        assert ann.subject_spans == frozenset({"blue whale"})
        assert ann.named_entities == frozenset({"pacific"})
        assert ann.link_tokens == frozenset({"whale"})
        # sentence not present in the sidecar: parse-derived sets are empty
        other = side.annotation(_sentence(1, "Another plain sentence here"), doc)
        assert other.noun_phrases == frozenset()


class TestExtractFeatures:
    def _pair(self, profile, q_doc=None, r_doc=None):
        q_doc = q_doc or Document(doc_id="q", text="x", source="s")
        r_doc = r_doc or Document(doc_id="r", text="x", source="s")
        q = _sentence(0, "Blue whales cross the cold ocean")
        r = _sentence(1, "The cold ocean holds blue whales")
        q_ann = pairgen.LingAnnotation(
            token_types=q.token_types,
            noun_phrases=frozenset({"blue whales", "the cold ocean"}),
            subject_spans=frozenset({"blue whales"}),
            named_entities=frozenset({"atlantic", "pacific"}),
            link_tokens=frozenset({"ocean", "reef"}),
        )
        r_ann = pairgen.LingAnnotation(
            token_types=r.token_types,
            noun_phrases=frozenset({"the cold ocean"}),
            subject_spans=frozenset(),
            named_entities=frozenset({"pacific"}),
            link_tokens=frozenset(),
        )
        return extract_features(q, q_ann, q_doc, r, r_ann, r_doc, 0.36, profile)

    def test_generic_profile_oracle(self):
        fv = self._pair("generic")
        assert fv.sim_score == -0.36
        # q types: blue whales cross the cold ocean; r lacks "cross"
        assert fv.word_types == pytest.approx(5 / 6)
        assert fv.noun_phrase == 0.5
        assert fv.subjects == 0.0
        assert fv.named_entity == 0.5
        assert fv.time == 0.0 and fv.wiki_article == 0.0 and fv.wiki_link == 0.0

    def test_news_time_feature(self):
        same = Document(doc_id="a", text="x", source="s", date=(2007, 3))
        other = Document(doc_id="b", text="x", source="s", date=(2007, 4))
        assert self._pair("news", q_doc=same, r_doc=same).time == 1.0
        assert self._pair("news", q_doc=same, r_doc=other).time == 0.0
        no_date = Document(doc_id="c", text="x", source="s")
        assert self._pair("news", q_doc=same, r_doc=no_date).time == 0.0

    def test_wiki_features(self):
        art = Document(doc_id="a", text="x", source="s", article_id="A1")
        same = Document(doc_id="b", text="x", source="s", article_id="A1")
        fv = self._pair("wiki", q_doc=art, r_doc=same)
        assert fv.wiki_article == 1.0
        # link tokens {ocean, reef}: only "ocean" appears in r's token types
        assert fv.wiki_link == 0.5
        assert fv.time == 0.0


class TestScore:
    def test_dot_product(self):
        fv = FeatureVector(0.5, 1.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0)
        w = [2.0, 1.0, 9.0, 9.0, 4.0, 9.0, 9.0, 9.0]
        assert score(fv, w) == pytest.approx(0.5 * 2 + 1.0 + 0.25 * 4)

    def test_weight_arity(self):
        with pytest.raises(ArgumentError):
            score(np.zeros(8), [1.0] * 7)


def _pair_obj(pid, p_text, h_text, s):
    return CandidatePair(
        pair_id=pid,
        premise_id="p",
        hypothesis_id="h",
        premise_text=p_text,
        hypothesis_text=h_text,
        origin="sim",
        score=s,
    )


class TestSelect:
    def test_orientation_dedup_keeps_earliest_pair_id(self):
        pairs = [
            _pair_obj("b", "Cats sleep.", "Dogs bark.", 9.0),
            _pair_obj("a", "Dogs bark!", "cats sleep", 1.0),
            _pair_obj("c", "Birds fly.", "Fish swim.", 5.0),
        ]
        out = select(pairs, 100.0)
        assert [p.pair_id for p in out] == ["c", "a"]

    def test_floor_and_min_one(self):
        pairs = [
            _pair_obj(f"p{i:02d}", f"text number {i}", f"other line {i}", float(i))
            for i in range(10)
        ]
        assert len(select(pairs, 25.0)) == 2
        assert len(select(pairs, 5.0)) == 1
        assert len(select(pairs, 100.0)) == 10
        top = select(pairs, 10.0)
        assert [p.pair_id for p in top] == ["p09"]

    def test_order_desc_score_then_pair_id(self):
        pairs = [
            _pair_obj("z", "one sentence", "two sentence", 5.0),
            _pair_obj("a", "three sentence", "four sentence", 5.0),
            _pair_obj("m", "five sentence", "six sentence", 7.0),
        ]
        out = select(pairs, 100.0)
        assert [p.pair_id for p in out] == ["m", "a", "z"]

    def test_requires_scores(self):
        bad = _pair_obj("a", "x y", "y z", 1.0)
        bad.score = None
        with pytest.raises(ArgumentError):
            select([bad], 50.0)

    def test_n_bounds(self):
        with pytest.raises(ArgumentError):
            select([], 0.0)
        with pytest.raises(ArgumentError):
            select([], 101.0)
        assert select([], 50.0) == []


class TestRescaleSim:
    def test_min_max(self):
        feats = np.zeros((3, 8))
        feats[:, 0] = [-4.0, -2.0, -3.0]
        out = rescale_sim(feats)
        np.testing.assert_allclose(out[:, 0], [0.0, 1.0, 0.5])
        assert feats[0, 0] == -4.0  # input untouched

    def test_degenerate_column(self):
        feats = np.zeros((2, 8))
        feats[:, 0] = [-1.0, -1.0]
        assert (rescale_sim(feats)[:, 0] == 0.5).all()

    def test_empty(self):
        assert rescale_sim(np.empty((0, 8))).shape == (0, 8)


def _reference_mine(corpus, vectors, index, ctx, params):
    """Object-level reimplementation: search, featurize, rescale, select."""
    ann_src = HeuristicAnnotations()
    pooled = []
    for qid in ctx.query_ids:
        q_sent = corpus.sentence(qid)
        q_doc = corpus.document_for(q_sent)
        q_ann = ann_src.annotation(q_sent, q_doc)
        q_norm = normalized_text(q_sent.text)
        for hit in search(index, vectors[qid], params.K, 1):
            hid = hit.sent_id
            r_sent = corpus.sentence(hid)
            if hid == qid or normalized_text(r_sent.text) == q_norm:
                continue
            r_doc = corpus.document_for(r_sent)
            fv = extract_features(
                q_sent, q_ann, q_doc, r_sent, ann_src.annotation(r_sent, r_doc),
                r_doc, hit.distance, corpus.profile,
            )
            pooled.append((qid, hid, fv))
    if not pooled:
        return []
    feats = np.stack([fv.as_array() for _, _, fv in pooled])
    feats = rescale_sim(feats)
    pairs = []
    for (qid, hid, _), row in zip(pooled, feats):
        pairs.append(
            CandidatePair(
                pair_id=ctx.pair_id(qid, hid),
                premise_id=str(qid),
                hypothesis_id=str(hid),
                premise_text=corpus.sentence(qid).text,
                hypothesis_text=corpus.sentence(hid).text,
                origin="sim",
                features=FeatureVector.from_array(row),
                score=score(row, params.weights),
            )
        )
    return select(pairs, params.N)


class TestMineEndToEnd:
    WEIGHTS = (0.6, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    def _ctx(self, tiny_stack, n_queries=5, k_cap=5, seed=3):
        corpus, vectors, index = tiny_stack
        return prepare(
            corpus, vectors, [index], n_queries=n_queries, k_cap=k_cap,
            nprobe=1, seed=seed,
        )

    def test_matches_object_level_reference(self, tiny_stack):
        corpus, vectors, index = tiny_stack
        ctx = self._ctx(tiny_stack)
        for n_pct in (100.0, 50.0, 30.0):
            params = MiningParams(weights=self.WEIGHTS, K=4, N=n_pct)
            got = mine(ctx, params)
            want = _reference_mine(corpus, vectors, index, ctx, params)
            assert [p.pair_id for p in got] == [p.pair_id for p in want]
            got_scores = [p.score for p in got]
            want_scores = [p.score for p in want]
            np.testing.assert_allclose(got_scores, want_scores, rtol=1e-12)

    def test_self_and_text_duplicates_never_mined(self, tiny_stack):
        ctx = self._ctx(tiny_stack)
        params = MiningParams(weights=self.WEIGHTS, K=5, N=100.0)
        pairs = mine(ctx, params)
        assert pairs
        for p in pairs:
            assert p.premise_id != p.hypothesis_id
            assert normalized_text(p.premise_text) != normalized_text(p.hypothesis_text)

    def test_unordered_text_dedup(self, tiny_stack):
        ctx = self._ctx(tiny_stack)
        params = MiningParams(weights=self.WEIGHTS, K=5, N=100.0)
        pairs = mine(ctx, params)
        seen = set()
        for p in pairs:
            key = tuple(
                sorted((normalized_text(p.premise_text), normalized_text(p.hypothesis_text)))
            )
            assert key not in seen
            seen.add(key)

    def test_weight_doubling_preserves_selection(self, tiny_stack):
        ctx = self._ctx(tiny_stack)
        p1 = MiningParams(weights=self.WEIGHTS, K=4, N=60.0)
        p2 = MiningParams(weights=tuple(2 * w for w in self.WEIGHTS), K=4, N=60.0)
        q1, h1, s1, _ = mine_arrays(ctx, p1)
        q2, h2, s2, _ = mine_arrays(ctx, p2)
        np.testing.assert_array_equal(q1, q2)
        np.testing.assert_array_equal(h1, h2)
        np.testing.assert_array_equal(2.0 * s1, s2)

    def test_k_one_pools_nothing(self, tiny_stack):
        # every query's nearest hit is itself, which is always dropped
        ctx = self._ctx(tiny_stack)
        params = MiningParams(weights=self.WEIGHTS, K=1, N=100.0)
        assert mine(ctx, params) == []

    def test_k_above_cap_rejected(self, tiny_stack):
        ctx = self._ctx(tiny_stack, k_cap=3)
        with pytest.raises(ArgumentError, match="cap"):
            mine(ctx, MiningParams(weights=self.WEIGHTS, K=4, N=50.0))

    def test_pair_id_format(self, tiny_stack):
        ctx = self._ctx(tiny_stack)
        assert ctx.pair_id(3, 12) == "sim-q0000003-h0000012"

    def test_deterministic_across_prepares(self, tiny_stack):
        params = MiningParams(weights=self.WEIGHTS, K=4, N=50.0)
        a = mine(self._ctx(tiny_stack), params)
        b = mine(self._ctx(tiny_stack), params)
        assert [p.to_json() for p in a] == [p.to_json() for p in b]


class TestPairsJsonl:
    def test_roundtrip_with_provenance_header(self, tmp_path):
        pairs = [
            CandidatePair(
                pair_id="sim-q0000001-h0000002",
                premise_id="1",
                hypothesis_id="2",
                premise_text="A b c.",
                hypothesis_text="D e f.",
                origin="sim",
                features=FeatureVector(*np.linspace(0, 1, 8)),
                score=0.75,
            ),
            CandidatePair(
                pair_id="wr-1-e",
                premise_id="1",
                hypothesis_id="wr-1-e",
                premise_text="A b c.",
                hypothesis_text="G h i.",
                origin="written",
                label="E",
            ),
        ]
        path = tmp_path / "pairs.jsonl"
        write_pairs_jsonl(path, pairs, header={"config_hash": "abc", "seed": 1})
        first = path.read_text().splitlines()[0]
        assert json.loads(first)["_provenance"]["seed"] == 1
        back = read_pairs_jsonl(path)
        assert back == pairs

    def test_missing_optional_fields(self, tmp_path):
        path = tmp_path / "pairs.jsonl"
        row = {
            "pair_id": "x",
            "premise_id": "1",
            "hypothesis_id": "2",
            "premise_text": "a",
            "hypothesis_text": "b",
            "origin": "translate",
        }
        path.write_text(json.dumps(row) + "\n")
        (pair,) = read_pairs_jsonl(path)
        assert pair.features is None and pair.score is None and pair.label is None
