from __future__ import annotations

import math
import random

import numpy as np
import pytest

from kwame.corpus import AnswerBank, AnswerParagraph
from kwame.retrieval import (
    IndexError_,
    VectorIndex,
    build_hash_index,
    build_tfidf_index,
    cosine_top_k,
    hash_embed,
    load_dense_index,
    load_index,
    save_index,
    tfidf_vectorize,
    tokenize,
)

from .conftest import make_bank


def tiny_bank(texts: list[str], lang: str = "en", lesson: int = 1) -> AnswerBank:
    paragraphs = [
        AnswerParagraph(
            id=f"{lang}-L{lesson}-P{i:02d}", lang=lang, lesson=lesson, ordinal=i, text=t
        )
        for i, t in enumerate(texts)
    ]
    return AnswerBank(paragraphs)


def brute_force_rank(matrix, ids, query, k, eligible=None):
    """Full-sort oracle over all dot products, ties by ascending id.

    Sorting and selection are reimplemented from scratch; each canonical
    score is additionally cross-checked against an independent per-row dot
    product (different BLAS path) at the 1e-6 agreement bound.
    """
    dense = np.asarray(matrix)
    canonical = dense @ np.asarray(query, dtype=np.float64)
    scored = []
    for i, pid in enumerate(ids):
        if eligible is not None and not eligible[i]:
            continue
        recomputed = float(np.dot(dense[i], query))
        assert abs(recomputed - float(canonical[i])) <= 1e-6
        scored.append((pid, float(canonical[i])))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


# -- tokenization --------------------------------------------------------------


def test_tokenize_strips_call_parentheses():
    assert tokenize("call ellipse() now") == ["call", "ellipse", "now"]


def test_tokenize_lowercases_unicode():
    assert tokenize("Écran Noir") == ["écran", "noir"]


# -- tf-idf --------------------------------------------------------------------


def test_tfidf_idf_values_match_hand_computation():
    # corpus ["a b", "b c"]: df(a)=1 -> ln(3/2)+1, df(b)=2 -> ln(3/3)+1
    bank = tiny_bank(["a b", "b c"])
    model, _ = build_tfidf_index(bank, "en")
    idf = {gram: model.idf[col] for gram, col in model.vocabulary.items()}
    assert idf["a"] == pytest.approx(math.log(3 / 2) + 1, abs=1e-4)
    assert idf["a"] == pytest.approx(1.4055, abs=1e-4)
    assert idf["b"] == pytest.approx(1.0)
    assert idf["c"] == pytest.approx(math.log(3 / 2) + 1, abs=1e-4)
    # bigrams are indexed too
    assert "a b" in model.vocabulary and "b c" in model.vocabulary


def test_tfidf_single_document_idf_is_one():
    bank = tiny_bank(["draw the circle"])
    model, index = build_tfidf_index(bank, "en")
    assert all(w == pytest.approx(1.0) for w in model.idf)
    assert index.n_rows == 1


def test_tfidf_indexes_one_row_per_paragraph():
    bank = make_bank(39, "en")
    _, index = build_tfidf_index(bank, "en")
    assert index.n_rows == 39


def test_tfidf_rows_are_unit_norm(bank):
    _, index = build_tfidf_index(bank, "en")
    norms = np.sqrt(np.asarray(index.vectors.multiply(index.vectors).sum(axis=1)).ravel())
    assert np.allclose(norms, 1.0, atol=1e-6)


def test_tfidf_empty_language_subset_errors():
    bank = tiny_bank(["only english text"], lang="en")
    with pytest.raises(IndexError_):
        build_tfidf_index(bank, "fr")


def test_tfidf_vectorize_identical_text_scores_one():
    bank = tiny_bank(["the draw function runs", "a variable stores values"])
    model, index = build_tfidf_index(bank, "en")
    query = tfidf_vectorize(model, "the draw function runs")
    result = cosine_top_k(query, index, k=1)
    assert result.answers[0].id == "en-L1-P00"
    assert result.answers[0].score == pytest.approx(1.0, abs=1e-6)


def test_tfidf_vectorize_oov_gives_zero_vector():
    bank = tiny_bank(["alpha beta", "gamma delta"])
    model, _ = build_tfidf_index(bank, "en")
    assert not np.any(tfidf_vectorize(model, "zzz qqq"))


def test_tfidf_vectorize_scale_invariance():
    bank = tiny_bank(["draw a circle", "store a value"])
    model, index = build_tfidf_index(bank, "en")
    once = cosine_top_k(tfidf_vectorize(model, "draw"), index, k=2)
    twice = cosine_top_k(tfidf_vectorize(model, "draw draw"), index, k=2)
    assert [a.id for a in once.answers] == [a.id for a in twice.answers]
    assert once.answers[0].score == pytest.approx(twice.answers[0].score, abs=1e-9)


def test_tfidf_self_retrieval_entire_bank(bank):
    for lang in ("en", "fr"):
        model, index = build_tfidf_index(bank, lang)
        for p in bank.subset(lang):
            result = cosine_top_k(tfidf_vectorize(model, p.text), index, k=1)
            assert result.answers[0].id == p.id
            assert result.answers[0].score == pytest.approx(1.0, abs=1e-6)


# -- hash embedding ------------------------------------------------------------


def test_hash_embed_deterministic():
    a = hash_embed("the quick brown fox", 256, seed=3)
    b = hash_embed("the quick brown fox", 256, seed=3)
    assert np.array_equal(a, b)


def test_hash_embed_identical_vs_disjoint_texts():
    # Fixed disjoint-token pair, dim 1024: cosine computed directly is ~0.
    same = float(np.dot(hash_embed("draw a circle", 1024), hash_embed("draw a circle", 1024)))
    assert same == pytest.approx(1.0, abs=1e-9)
    disjoint = float(
        np.dot(
            hash_embed("draw the circle shape", 1024),
            hash_embed("store memory values here", 1024),
        )
    )
    assert abs(disjoint) < 0.2


def test_hash_embed_empty_text_is_zero_vector():
    assert not np.any(hash_embed("", 64))


def test_hash_embed_seed_changes_vector():
    a = hash_embed("some words here", 128, seed=1)
    b = hash_embed("some words here", 128, seed=2)
    assert not np.array_equal(a, b)


def test_hash_embed_rejects_small_dim():
    with pytest.raises(ValueError):
        hash_embed("text", 4)


# -- dense loading ---------------------------------------------------------------


def write_vectors(path, rows):
    import json

    with open(path, "w", encoding="utf-8") as fh:
        for pid, vec in rows:
            fh.write(json.dumps({"id": pid, "vector": list(vec)}) + "\n")


def test_load_dense_index_reorders_and_normalizes(tmp_path):
    bank = make_bank(3, "en")
    ids = [p.id for p in bank.paragraphs]
    rows = [(ids[2], [0.0, 2.0]), (ids[0], [3.0, 0.0]), (ids[1], [1.0, 1.0])]
    path = tmp_path / "v.jsonl"
    write_vectors(path, rows)
    index = load_dense_index(path, bank, "en")
    assert index.ids == ids
    assert index.dim == 2
    assert np.allclose(index.vectors[0], [1.0, 0.0])
    assert np.allclose(np.linalg.norm(index.vectors, axis=1), 1.0)


def test_load_dense_index_flags_zero_rows(tmp_path):
    bank = make_bank(2, "en")
    ids = [p.id for p in bank.paragraphs]
    path = tmp_path / "v.jsonl"
    write_vectors(path, [(ids[0], [0.0, 0.0]), (ids[1], [1.0, 0.0])])
    index = load_dense_index(path, bank, "en")
    assert index.zero_rows == {0}
    result = cosine_top_k(np.array([1.0, 0.0]), index, k=5)
    assert [a.id for a in result.answers] == [ids[1]]


def test_load_dense_index_missing_id_named(tmp_path):
    bank = make_bank(3, "en")
    ids = [p.id for p in bank.paragraphs]
    path = tmp_path / "v.jsonl"
    write_vectors(path, [(ids[0], [1.0, 0.0]), (ids[2], [0.0, 1.0])])
    with pytest.raises(IndexError_, match=ids[1]):
        load_dense_index(path, bank, "en")


def test_load_dense_index_dimension_mismatch_named(tmp_path):
    bank = make_bank(2, "en")
    ids = [p.id for p in bank.paragraphs]
    path = tmp_path / "v.jsonl"
    write_vectors(path, [(ids[0], [1.0, 0.0]), (ids[1], [1.0, 0.0, 0.5])])
    with pytest.raises(IndexError_, match="dimension mismatch"):
        load_dense_index(path, bank, "en")


def test_load_dense_index_rejects_unknown_id_and_nonfinite(tmp_path):
    bank = make_bank(2, "en")
    ids = [p.id for p in bank.paragraphs]
    path = tmp_path / "v.jsonl"
    write_vectors(path, [(ids[0], [1.0]), (ids[1], [1.0]), ("en-L9-P00", [1.0])])
    with pytest.raises(IndexError_, match="unknown"):
        load_dense_index(path, bank, "en")
    import json

    path.write_text(
        json.dumps({"id": ids[0], "vector": [float("nan")]})
        + "\n"
        + json.dumps({"id": ids[1], "vector": [1.0]})
        + "\n",
        encoding="utf-8",
    )
    with pytest.raises(IndexError_, match="non-finite"):
        load_dense_index(path, bank, "en")


# -- cosine_top_k ----------------------------------------------------------------


def axes_index() -> VectorIndex:
    bank = make_bank(3, "en")
    vectors = np.array([[1.0, 0.0], [0.0, 1.0], [1 / math.sqrt(2), 1 / math.sqrt(2)]])
    return VectorIndex(
        lang="en",
        backend="dense",
        dim=2,
        ids=["en-L1-P00", "en-L1-P01", "en-L1-P02"],
        vectors=vectors,
        paragraphs=bank.paragraphs,
    )


def test_cosine_top_k_hand_computed_scores():
    result = cosine_top_k(np.array([1.0, 0.0]), axes_index(), k=3)
    assert [(a.id, round(a.score, 4), a.rank) for a in result.answers] == [
        ("en-L1-P00", 1.0, 1),
        ("en-L1-P02", 0.7071, 2),
        ("en-L1-P01", 0.0, 3),
    ]


def test_cosine_top_k_identity_query():
    result = cosine_top_k(np.array([0.0, 1.0]), axes_index(), k=1)
    assert [(a.id, a.score) for a in result.answers] == [("en-L1-P01", pytest.approx(1.0))]


def test_cosine_top_k_tie_broken_by_ascending_id():
    bank = make_bank(2, "en")
    vectors = np.array([[1.0, 0.0], [1.0, 0.0]])
    index = VectorIndex(
        lang="en", backend="dense", dim=2,
        ids=["en-L1-P01", "en-L1-P00"],
        vectors=vectors, paragraphs=list(reversed(bank.paragraphs)),
    )
    result = cosine_top_k(np.array([1.0, 0.0]), index, k=2)
    assert [a.id for a in result.answers] == ["en-L1-P00", "en-L1-P01"]


def test_cosine_top_k_zero_query_flags_no_signal():
    result = cosine_top_k(np.zeros(2), axes_index(), k=3)
    assert result.answers == [] and result.no_signal


def test_cosine_top_k_dimension_mismatch():
    with pytest.raises(IndexError_, match="dimension"):
        cosine_top_k(np.ones(3), axes_index(), k=1)


def test_cosine_top_k_filter_excludes_before_ranking(bank):
    index = build_hash_index(bank, "en", dim=256, seed=1)
    query = hash_embed(bank.subset("en")[0].text, 256, 1)
    filtered = cosine_top_k(query, index, k=50, predicate=lambda p: p.lesson == 2)
    assert filtered.answers
    assert all(a.id.startswith("en-L2-") for a in filtered.answers)
    unfiltered = cosine_top_k(query, index, k=50)
    assert len(unfiltered.answers) >= len(filtered.answers)


def test_cosine_top_k_matches_brute_force_oracle():
    rng = random.Random(99)
    for _ in range(25):
        n = rng.randint(2, 60)
        dim = rng.choice([8, 16, 32])
        bank = make_bank(n, "en")
        index = build_hash_index(bank, "en", dim=dim, seed=rng.randint(0, 10))
        for _ in range(10):
            query = np.array([rng.gauss(0, 1) for _ in range(dim)])
            k = rng.randint(1, n + 2)
            expected = brute_force_rank(np.asarray(index.vectors), index.ids, query, k)
            got = cosine_top_k(query, index, k=k)
            assert [a.id for a in got.answers] == [pid for pid, _ in expected]
            for a, (_, score) in zip(got.answers, expected):
                assert a.score == pytest.approx(score, abs=1e-6)


def test_rank_k_prefix_property():
    rng = random.Random(5)
    bank = make_bank(30, "en")
    index = build_hash_index(bank, "en", dim=64, seed=2)
    for _ in range(20):
        query = np.array([rng.gauss(0, 1) for _ in range(64)])
        for k in (1, 3, 5):
            small = cosine_top_k(query, index, k=k).answers
            bigger = cosine_top_k(query, index, k=k + 1).answers
            assert [a.id for a in small] == [a.id for a in bigger[:k]]


def test_scale_invariance_of_ranking():
    bank = make_bank(10, "en")
    index = build_hash_index(bank, "en", dim=32, seed=0)
    rng = random.Random(1)
    raw = np.array([rng.gauss(0, 1) for _ in range(32)])
    base = raw / np.linalg.norm(raw)
    scaled = (3.7 * raw) / np.linalg.norm(3.7 * raw)
    assert [a.id for a in cosine_top_k(base, index, k=10).answers] == [
        a.id for a in cosine_top_k(scaled, index, k=10).answers
    ]


# -- index cache ------------------------------------------------------------------


def test_index_save_load_round_trip(tmp_path, bank):
    model, index = build_tfidf_index(bank, "en")
    index.meta["bank_digest"] = "abc123" * 10
    path = tmp_path / "index.bin"
    save_index(path, index, tfidf_model=model)
    loaded, loaded_model = load_index(path, bank_digest="abc123" * 10)
    assert loaded.ids == index.ids
    assert loaded_model.vocabulary == model.vocabulary
    query = tfidf_vectorize(loaded_model, bank.subset("en")[0].text)
    assert cosine_top_k(query, loaded, k=1).answers[0].id == bank.subset("en")[0].id


def test_index_cache_invalidated_on_digest_change(tmp_path, bank):
    index = build_hash_index(bank, "en", dim=64, seed=0)
    index.meta["bank_digest"] = "old-digest"
    path = tmp_path / "index.bin"
    save_index(path, index)
    with pytest.raises(IndexError_, match="stale"):
        load_index(path, bank_digest="new-digest")
