"""Word-vector loading and bag-of-words sentence encoding."""

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pairmine.corpus import ingest
from pairmine.embed import (
    VectorStore,
    encode,
    encode_corpus,
    load_cache,
    load_vectors,
    nonzero_rows,
    normalize,
    save_cache,
)
from pairmine.errors import VectorParseError


def _write_vectors(path, rows, dim=2, count=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{count if count is not None else len(rows)} {dim}\n")
        for row in rows:
            fh.write(row + "\n")
    return path


class TestLoadVectors:
    def test_roundtrip(self, tmp_path):
        path = _write_vectors(tmp_path / "v.txt", ["cat 1.0 2.0", "dog -1.5 0.25"])
        store = load_vectors(path)
        assert store.dim == 2
        assert "cat" in store
        np.testing.assert_array_equal(store.table["dog"], np.array([-1.5, 0.25], dtype=np.float32))

    def test_duplicate_last_wins_and_counted(self, tmp_path):
        path = _write_vectors(tmp_path / "v.txt", ["cat 1 2", "cat 3 4"])
        store = load_vectors(path)
        assert store.duplicate_rows == 1
        np.testing.assert_array_equal(store.table["cat"], np.array([3, 4], dtype=np.float32))

    def test_wrong_arity_names_line(self, tmp_path):
        path = _write_vectors(tmp_path / "v.txt", ["cat 1 2", "dog 1"])
        with pytest.raises(VectorParseError) as err:
            load_vectors(path)
        assert err.value.line_no == 3

    def test_non_numeric_component(self, tmp_path):
        path = _write_vectors(tmp_path / "v.txt", ["cat 1 x"])
        with pytest.raises(VectorParseError):
            load_vectors(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "v.txt"
        path.write_text("just-one-field\n")
        with pytest.raises(VectorParseError) as err:
            load_vectors(path)
        assert err.value.line_no == 1

    def test_nonpositive_dim(self, tmp_path):
        path = tmp_path / "v.txt"
        path.write_text("3 0\n")
        with pytest.raises(VectorParseError):
            load_vectors(path)

    def test_blank_lines_skipped(self, tmp_path):
        path = _write_vectors(tmp_path / "v.txt", ["cat 1 2", "", "dog 3 4"])
        assert len(load_vectors(path).table) == 2


class TestEncode:
    @pytest.fixture()
    def store(self, tmp_path):
        return load_vectors(
            _write_vectors(tmp_path / "v.txt", ["cat 1 2", "dog 3 4", "sat 5 6"])
        )

    def test_mean_with_multiplicity(self, store):
        # cat appears twice: mean = (2*[1,2] + [3,4]) / 3
        vec = encode("The cat saw the cat dog", store)
        np.testing.assert_allclose(vec.values, [5 / 3, 8 / 3], rtol=1e-6)
        assert vec.oov_fraction == pytest.approx(3 / 6)

    def test_all_oov_is_zero(self, store):
        vec = encode("unknown words only", store)
        assert vec.is_zero
        assert not vec.values.any()

    def test_normalization_applied_to_tokens(self, store):
        same = encode("CAT, dog!", store)
        plain = encode("cat dog", store)
        np.testing.assert_array_equal(same.values, plain.values)

    def test_normalize_unit_norm(self, store):
        vec = normalize(encode("cat dog", store))
        assert np.linalg.norm(vec.values) == pytest.approx(1.0, abs=1e-6)

    def test_normalize_zero_passthrough(self, store):
        vec = normalize(encode("zzz", store))
        assert vec.is_zero
        assert not vec.values.any()

    @given(st.permutations(["cat", "dog", "sat", "cat", "unknown"]))
    def test_order_invariance(self, words):
        store = VectorStore(
            dim=2,
            table={
                "cat": np.array([1, 2], dtype=np.float32),
                "dog": np.array([3, 4], dtype=np.float32),
                "sat": np.array([5, 6], dtype=np.float32),
            },
        )
        base = encode("cat dog sat cat unknown", store)
        got = encode(" ".join(words), store)
        np.testing.assert_allclose(got.values, base.values, atol=1e-6)
        assert got.oov_fraction == base.oov_fraction


class TestEncodeCorpus:
    def test_rows_align_with_sent_ids(self, tmp_path):
        docs = tmp_path / "docs.jsonl"
        with open(docs, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"id": "a", "text": "Cat dog sat here. Qq zz xx yy."}) + "\n")
        corpus = ingest(docs, "generic")
        store = load_vectors(
            _write_vectors(tmp_path / "v.txt", ["cat 3 4", "dog 0 0", "sat 0 0", "here 0 0"])
        )
        matrix = encode_corpus(corpus, store, unit_norm=True)
        assert matrix.shape == (2, 2)
        np.testing.assert_allclose(matrix[0], [0.6, 0.8], rtol=1e-6)
        assert not matrix[1].any()  # all-OOV row stays zero
        np.testing.assert_array_equal(nonzero_rows(matrix), [0])

    def test_unit_norm_off(self, tmp_path):
        docs = tmp_path / "docs.jsonl"
        with open(docs, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"id": "a", "text": "Cat dog sat here."}) + "\n")
        corpus = ingest(docs, "generic")
        store = load_vectors(_write_vectors(tmp_path / "v.txt", ["cat 3 4"]))
        matrix = encode_corpus(corpus, store, unit_norm=False)
        np.testing.assert_allclose(matrix[0], [3, 4], rtol=1e-6)


class TestCache:
    def test_roundtrip_exact(self, tmp_path):
        matrix = np.random.default_rng(0).standard_normal((7, 5)).astype(np.float32)
        path = tmp_path / "emb.bin"
        save_cache(path, matrix)
        np.testing.assert_array_equal(load_cache(path), matrix)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "emb.bin"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 16)
        with pytest.raises(VectorParseError):
            load_cache(path)
