"""End-to-end question pipeline: route by language, vectorize, rank, gate.

An engine owns one bank plus any number of (language, backend) index
entries. Each entry pairs a search index with the query vectorizer that
produced its rows, so a question is always embedded the same way as the
answers it is scored against. Engine state is immutable once loaded;
``ask`` is reentrant and safe under concurrent callers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .corpus import AnswerBank
from .language import detect_language
from .retrieval import (
    VectorIndex,
    build_hash_index,
    build_tfidf_index,
    cosine_top_k,
    hash_embed,
    tfidf_vectorize,
)

_LESSON_TAG_RE = re.compile(r"^#lesson(\d+)$", re.IGNORECASE)

NO_CONFIDENT_ANSWER = "no confident answer"
NO_SIGNAL = "no signal in question"
NO_MATCHING_ANSWERS = "no matching answers"


class MissingIndexError(LookupError):
    """No index is loaded for the requested (language, backend) pair."""


@dataclass(frozen=True)
class AskRequest:
    question: str
    top_k: int = 3
    lang_override: str | None = None
    lesson_tag: int | None = None
    threshold: float | None = None
    backend: str = "tfidf"

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")
        if self.threshold is not None and not -1.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [-1, 1], got {self.threshold}")


@dataclass
class AnswerHit:
    id: str
    text: str
    figure_refs: list[str]
    score: float
    rank: int


@dataclass
class AskResponse:
    lang_detected: str
    answered: bool
    answers: list[AnswerHit]
    message: str | None = None


def parse_tags(question: str) -> tuple[str, int | None]:
    """Strip #lessonN tokens from a question; the first tag's number wins."""
    tokens = question.split()
    matches = [_LESSON_TAG_RE.match(tok) for tok in tokens]
    if not any(matches):
        return question, None
    lesson = next(int(m.group(1)) for m in matches if m)
    cleaned = " ".join(tok for tok, m in zip(tokens, matches) if not m)
    return cleaned, lesson


@dataclass
class IndexEntry:
    index: VectorIndex
    vectorize: Callable[[str], np.ndarray]


class QAEngine:
    """Per-language answer banks and search indexes behind one ask() call."""

    def __init__(self, bank: AnswerBank):
        bank.validate()
        self.bank = bank
        self._entries: dict[tuple[str, str], IndexEntry] = {}

    # -- index registration ------------------------------------------------

    def add_tfidf_index(self, lang: str) -> None:
        model, index = build_tfidf_index(self.bank, lang)
        self._entries[(lang, "tfidf")] = IndexEntry(
            index=index, vectorize=lambda text, m=model: tfidf_vectorize(m, text)
        )

    def add_hash_index(self, lang: str, dim: int = 1024, seed: int = 0) -> None:
        index = build_hash_index(self.bank, lang, dim=dim, seed=seed)
        self._entries[(lang, "hash")] = IndexEntry(
            index=index, vectorize=lambda text, d=dim, s=seed: hash_embed(text, d, s)
        )

    def add_dense_index(
        self,
        lang: str,
        index: VectorIndex,
        query_embedder: Callable[[str], np.ndarray],
        label: str = "dense",
    ) -> None:
        """Register a preloaded dense index under a backend label.

        ``query_embedder`` maps a question to a raw vector (the engine
        normalizes); several labelled dense indexes can coexist, e.g. when
        comparing embedding model variants in the evaluation harness.
        """

        def vectorize(text: str) -> np.ndarray:
            vec = np.asarray(query_embedder(text), dtype=np.float64).reshape(-1)
            norm = np.linalg.norm(vec)
            return vec / norm if norm else vec

        self._entries[(lang, label)] = IndexEntry(index=index, vectorize=vectorize)

    def register_entry(self, lang: str, label: str, entry: IndexEntry) -> None:
        self._entries[(lang, label)] = entry

    # -- introspection -----------------------------------------------------

    def languages(self) -> list[str]:
        return sorted({lang for lang, _ in self._entries})

    def backends(self, lang: str | None = None) -> list[str]:
        if lang is None:
            return sorted({label for _, label in self._entries})
        return sorted(label for entry_lang, label in self._entries if entry_lang == lang)

    def entry(self, lang: str, backend: str) -> IndexEntry:
        try:
            return self._entries[(lang, backend)]
        except KeyError:
            raise MissingIndexError(
                f"no {backend!r} index loaded for language {lang!r}"
            ) from None

    # -- the query path ----------------------------------------------------

    def ask(self, req: AskRequest) -> AskResponse:
        """Resolve language, vectorize the question, and return ranked answers.

        Lesson tags are parsed out before detection so the tag token cannot
        bias the language score. With a threshold set, a top score below it
        yields answered=False and no answers.
        """
        clean_question, parsed_tag = parse_tags(req.question)
        lesson = req.lesson_tag if req.lesson_tag is not None else parsed_tag

        if req.lang_override is not None:
            lang = req.lang_override
        else:
            lang, _ = detect_language(clean_question)

        entry = self.entry(lang, req.backend)
        query = entry.vectorize(clean_question)

        predicate = None
        if lesson is not None:
            predicate = lambda p, wanted=lesson: p.lesson == wanted  # noqa: E731

        result = cosine_top_k(query, entry.index, k=req.top_k, predicate=predicate)

        if req.threshold is not None and (
            not result.answers or result.answers[0].score < req.threshold
        ):
            return AskResponse(
                lang_detected=lang, answered=False, answers=[], message=NO_CONFIDENT_ANSWER
            )
        if not result.answers:
            message = NO_SIGNAL if result.no_signal else NO_MATCHING_ANSWERS
            return AskResponse(lang_detected=lang, answered=False, answers=[], message=message)

        hits = []
        for scored in result.answers:
            paragraph = self.bank.get(scored.id)
            hits.append(
                AnswerHit(
                    id=scored.id,
                    text=paragraph.text,
                    figure_refs=list(paragraph.figure_refs),
                    score=scored.score,
                    rank=scored.rank,
                )
            )
        return AskResponse(lang_detected=lang, answered=True, answers=hits)
