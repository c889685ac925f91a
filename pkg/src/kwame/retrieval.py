"""Cosine search over per-language vector indexes.

Three interchangeable backends produce the row vectors: a sparse TF-IDF
matrix built from the bank itself, dense vectors loaded from a precomputed
embedding file, and a seeded feature-hash embedder that needs no model at
all. Rows are L2-normalized once at build/load time so query scoring is a
plain dot product. Search is an exact full scan; banks are hundreds of
paragraphs, not millions.
"""

from __future__ import annotations

import hashlib
import json
import math
import pickle
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import sparse

from .corpus import AnswerBank, AnswerParagraph

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)

INDEX_FORMAT_VERSION = 1


class IndexError_(ValueError):
    """Raised for malformed vector files, dimension mismatches, stale caches."""


def tokenize(text: str) -> list[str]:
    """Unicode lowercase word tokens; 'ellipse()' tokenizes to 'ellipse'."""
    return _TOKEN_RE.findall(text.lower())


def token_ngrams(tokens: list[str]) -> list[str]:
    """Unigrams plus space-joined bigrams."""
    grams = list(tokens)
    grams.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    return grams


@dataclass
class TfidfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    ngram_range: tuple[int, int] = (1, 2)


@dataclass
class VectorIndex:
    """Immutable search index: one L2-normalized row per answer paragraph.

    ``paragraphs`` is row-aligned with ``ids`` so metadata predicates
    (lesson filters) can run without a bank lookup. ``zero_rows`` flags
    rows with no signal; they are excluded from ranking.
    """

    lang: str
    backend: str
    dim: int
    ids: list[str]
    vectors: np.ndarray | sparse.csr_matrix
    paragraphs: list[AnswerParagraph]
    meta: dict = field(default_factory=dict)
    zero_rows: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        self._id_array = np.array(self.ids)

    @property
    def n_rows(self) -> int:
        return len(self.ids)


@dataclass
class ScoredAnswer:
    id: str
    score: float
    rank: int


@dataclass
class TopKResult:
    answers: list[ScoredAnswer]
    no_signal: bool = False


def _normalize_rows_dense(matrix: np.ndarray) -> tuple[np.ndarray, frozenset[int]]:
    norms = np.linalg.norm(matrix, axis=1)
    zero = frozenset(int(i) for i in np.flatnonzero(norms == 0.0))
    safe = np.where(norms == 0.0, 1.0, norms)
    return matrix / safe[:, None], zero


def build_tfidf_index(bank: AnswerBank, lang: str) -> tuple[TfidfModel, VectorIndex]:
    """Build the unigram+bigram TF-IDF index over one language's paragraphs.

    tf is the raw in-document count; idf = ln((1+N)/(1+df)) + 1; rows are
    L2-normalized. The vocabulary covers exactly the n-grams seen in the
    bank subset, in sorted order for reproducibility.
    """
    paragraphs = bank.subset(lang)
    if not paragraphs:
        raise IndexError_(f"bank has no paragraphs for language {lang!r}")

    doc_grams = [token_ngrams(tokenize(p.text)) for p in paragraphs]
    df: dict[str, int] = {}
    for grams in doc_grams:
        for gram in set(grams):
            df[gram] = df.get(gram, 0) + 1
    vocabulary = {gram: i for i, gram in enumerate(sorted(df))}
    n_docs = len(paragraphs)
    idf = np.empty(len(vocabulary))
    for gram, col in vocabulary.items():
        idf[col] = math.log((1 + n_docs) / (1 + df[gram])) + 1.0

    rows, cols, vals = [], [], []
    for r, grams in enumerate(doc_grams):
        counts: dict[str, int] = {}
        for gram in grams:
            counts[gram] = counts.get(gram, 0) + 1
        for gram, tf in counts.items():
            c = vocabulary[gram]
            rows.append(r)
            cols.append(c)
            vals.append(tf * idf[c])
    matrix = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(n_docs, len(vocabulary)), dtype=np.float64
    )
    norms = np.sqrt(np.asarray(matrix.multiply(matrix).sum(axis=1)).ravel())
    zero = frozenset(int(i) for i in np.flatnonzero(norms == 0.0))
    scale = np.where(norms == 0.0, 1.0, 1.0 / norms)
    matrix = sparse.diags(scale) @ matrix

    model = TfidfModel(vocabulary=vocabulary, idf=idf)
    index = VectorIndex(
        lang=lang,
        backend="tfidf",
        dim=len(vocabulary),
        ids=[p.id for p in paragraphs],
        vectors=matrix.tocsr(),
        paragraphs=paragraphs,
        meta={"ngram_range": [1, 2], "n_docs": n_docs},
        zero_rows=zero,
    )
    return model, index


def tfidf_vectorize(model: TfidfModel, text: str) -> np.ndarray:
    """Project query text into the model's vocabulary; OOV n-grams drop out."""
    vec = np.zeros(len(model.vocabulary))
    for gram in token_ngrams(tokenize(text)):
        col = model.vocabulary.get(gram)
        if col is not None:
            vec[col] += model.idf[col]
    norm = np.linalg.norm(vec)
    return vec / norm if norm else vec


def hash_embed(text: str, dim: int, seed: int = 0) -> np.ndarray:
    """Deterministic signed feature hash of token unigrams+bigrams.

    Stands in for a learned sentence embedding wherever search behaviour
    rather than semantic quality is under test; identical text always maps
    to an identical vector. Empty or all-punctuation text yields the zero
    vector.
    """
    if dim < 8:
        raise ValueError(f"hash embedding dim must be >= 8, got {dim}")
    key = int(seed).to_bytes(8, "big")
    vec = np.zeros(dim)
    for gram in token_ngrams(tokenize(text)):
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=9, key=key).digest()
        bucket = int.from_bytes(digest[:8], "big") % dim
        vec[bucket] += 1.0 if digest[8] & 1 else -1.0
    norm = np.linalg.norm(vec)
    return vec / norm if norm else vec


def build_hash_index(bank: AnswerBank, lang: str, dim: int = 1024, seed: int = 0) -> VectorIndex:
    paragraphs = bank.subset(lang)
    if not paragraphs:
        raise IndexError_(f"bank has no paragraphs for language {lang!r}")
    matrix = np.vstack([hash_embed(p.text, dim, seed) for p in paragraphs])
    zero = frozenset(int(i) for i in np.flatnonzero(np.linalg.norm(matrix, axis=1) == 0.0))
    return VectorIndex(
        lang=lang,
        backend="hash",
        dim=dim,
        ids=[p.id for p in paragraphs],
        vectors=matrix,
        paragraphs=paragraphs,
        meta={"dim": dim, "seed": seed},
        zero_rows=zero,
    )


def load_dense_index(path: str | Path, bank: AnswerBank, lang: str) -> VectorIndex:
    """Load a precomputed {"id", "vector"} JSON-lines embedding file.

    Records are reordered to bank order and re-normalized; the file must
    cover the bank's language subset exactly, one vector per paragraph.
    """
    paragraphs = bank.subset(lang)
    expected = {p.id for p in paragraphs}
    records: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                pid = rec["id"]
                vector = np.asarray(rec["vector"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise IndexError_(f"{path}: malformed vector record on line {lineno}: {exc}") from exc
            if vector.ndim != 1:
                raise IndexError_(f"{path}: vector for id {pid!r} is not one-dimensional")
            if not np.all(np.isfinite(vector)):
                raise IndexError_(f"{path}: non-finite component in vector for id {pid!r}")
            if dim is None:
                dim = int(vector.shape[0])
            elif vector.shape[0] != dim:
                raise IndexError_(
                    f"{path}: dimension mismatch for id {pid!r}: expected {dim}, got {vector.shape[0]}"
                )
            if pid not in expected:
                raise IndexError_(f"{path}: unknown paragraph id {pid!r} for language {lang!r}")
            if pid in records:
                raise IndexError_(f"{path}: duplicate vector for id {pid!r}")
            records[pid] = vector
    missing = [p.id for p in paragraphs if p.id not in records]
    if missing:
        raise IndexError_(f"{path}: missing vector for id {missing[0]!r}")
    if dim is None:
        raise IndexError_(f"{path}: no vector records found")

    matrix = np.vstack([records[p.id] for p in paragraphs])
    matrix, zero = _normalize_rows_dense(matrix)
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return VectorIndex(
        lang=lang,
        backend="dense",
        dim=dim,
        ids=[p.id for p in paragraphs],
        vectors=matrix,
        paragraphs=paragraphs,
        meta={"source": str(path), "source_digest": digest},
        zero_rows=zero,
    )


def cosine_top_k(
    query: np.ndarray,
    index: VectorIndex,
    k: int,
    predicate: Callable[[AnswerParagraph], bool] | None = None,
) -> TopKResult:
    """Exact top-k by dot product over pre-normalized rows.

    Rows failing the predicate and flagged zero rows are excluded before
    ranking; ties break by ascending paragraph id. A zero query vector has
    no direction to score against, so it returns an empty, flagged result
    instead of arbitrary ranks.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    if q.shape[0] != index.dim:
        raise IndexError_(f"query dimension {q.shape[0]} does not match index dimension {index.dim}")
    if not np.any(q):
        return TopKResult(answers=[], no_signal=True)

    scores = np.asarray(index.vectors @ q).reshape(-1)
    mask = np.ones(index.n_rows, dtype=bool)
    for i in index.zero_rows:
        mask[i] = False
    if predicate is not None:
        for i, paragraph in enumerate(index.paragraphs):
            if mask[i] and not predicate(paragraph):
                mask[i] = False
    eligible = np.flatnonzero(mask)
    if eligible.size == 0:
        return TopKResult(answers=[])

    sub_scores = scores[eligible]
    sub_ids = index._id_array[eligible]
    order = np.lexsort((sub_ids, -sub_scores))[:k]
    return TopKResult(
        answers=[
            ScoredAnswer(id=str(sub_ids[j]), score=float(sub_scores[j]), rank=r)
            for r, j in enumerate(order, start=1)
        ]
    )


def save_index(path: str | Path, index: VectorIndex, tfidf_model: TfidfModel | None = None) -> None:
    """Serialize an index (and its TF-IDF model, if any) to one cache file."""
    payload = {
        "format_version": INDEX_FORMAT_VERSION,
        "index": index,
        "tfidf_model": tfidf_model,
    }
    with open(path, "wb") as fh:
        pickle.dump(payload, fh)


def load_index(path: str | Path, bank_digest: str | None = None) -> tuple[VectorIndex, TfidfModel | None]:
    """Load a cached index; a bank digest mismatch invalidates the cache."""
    with open(path, "rb") as fh:
        payload = pickle.load(fh)
    if payload.get("format_version") != INDEX_FORMAT_VERSION:
        raise IndexError_(f"{path}: unsupported index format {payload.get('format_version')!r}")
    index: VectorIndex = payload["index"]
    if bank_digest is not None:
        cached = index.meta.get("bank_digest")
        if cached is not None and cached != bank_digest:
            raise IndexError_(
                f"{path}: index cache is stale (bank digest {bank_digest[:12]} != cached {cached[:12]})"
            )
    return index, payload.get("tfidf_model")


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
