"""Answer bank ingestion, QA pair loading, and weak-label triplet mining.

Lesson documents arrive as plain text or Markdown. Code blocks, table rows
and figure captions are stripped, the surviving prose is split into
paragraphs, and each paragraph becomes one candidate answer. Questions are
always answered with whole paragraphs, never extracted spans.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

SUPPORTED_LANGUAGES = ("en", "fr")

_FENCE_RE = re.compile(r"^\s*```")
_CODE_LINE_RE = re.compile(r"^(?: {4,}|\t)\S")
_FIGURE_CAPTION_RE = re.compile(r"^(?:figure|fig\.?)(?:\s|$|[:.])", re.IGNORECASE)
_FIGURE_REF_RE = re.compile(r"\b[Ff]ig(?:ure|\.)?\s*\d+")
_PARAGRAPH_ID_RE = re.compile(r"^(en|fr)-L(\d+)-P(\d+)$")
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


class CorpusError(ValueError):
    """Raised when a bank, QA file, or triplet request violates its contract."""


@dataclass
class AnswerParagraph:
    """One candidate answer: a prose paragraph from a lesson document."""

    id: str
    lang: str
    lesson: int
    ordinal: int
    text: str
    figure_refs: list[str] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "lang": self.lang,
            "lesson": self.lesson,
            "ordinal": self.ordinal,
            "text": self.text,
            "figure_refs": list(self.figure_refs),
        }


@dataclass
class AnswerBank:
    """Ordered collection of answer paragraphs, possibly spanning languages."""

    paragraphs: list[AnswerParagraph]

    def __post_init__(self) -> None:
        self._by_id = {p.id: p for p in self.paragraphs}

    @property
    def languages(self) -> set[str]:
        return {p.lang for p in self.paragraphs}

    def get(self, paragraph_id: str) -> AnswerParagraph:
        try:
            return self._by_id[paragraph_id]
        except KeyError:
            raise KeyError(f"unknown paragraph id {paragraph_id!r}") from None

    def subset(self, lang: str) -> list[AnswerParagraph]:
        return [p for p in self.paragraphs if p.lang == lang]

    def validate(self) -> None:
        """Check id uniqueness, id/field consistency, and non-empty text."""
        seen_ids: set[str] = set()
        seen_slots: set[tuple[str, int, int]] = set()
        for p in self.paragraphs:
            if p.id in seen_ids:
                raise CorpusError(f"duplicate paragraph id {p.id!r}")
            seen_ids.add(p.id)
            m = _PARAGRAPH_ID_RE.match(p.id)
            if not m:
                raise CorpusError(f"malformed paragraph id {p.id!r}")
            if m.group(1) != p.lang or int(m.group(2)) != p.lesson or int(m.group(3)) != p.ordinal:
                raise CorpusError(f"paragraph id {p.id!r} disagrees with its lang/lesson/ordinal fields")
            slot = (p.lang, p.lesson, p.ordinal)
            if slot in seen_slots:
                raise CorpusError(f"duplicate ordinal {p.ordinal} within ({p.lang}, lesson {p.lesson})")
            seen_slots.add(slot)
            if p.lang not in SUPPORTED_LANGUAGES:
                raise CorpusError(f"unsupported language {p.lang!r} in paragraph {p.id!r}")
            if not p.text.strip():
                raise CorpusError(f"paragraph {p.id!r} has empty text")


@dataclass
class QAPair:
    qid: str
    lang: str
    qtype: str
    question: str
    gold_ids: list[str]


@dataclass
class QASet:
    pairs: list[QAPair]

    def filter(self, lang: str | None = None, qtype: str | None = None) -> list[QAPair]:
        out = self.pairs
        if lang is not None:
            out = [p for p in out if p.lang == lang]
        if qtype is not None:
            out = [p for p in out if p.qtype == qtype]
        return out


@dataclass
class Triplet:
    anchor: str
    positive: str
    negative: str
    anchor_paragraph: str
    negative_paragraph: str


@dataclass
class TripletSet:
    triplets: list[Triplet]
    seed: int
    lang: str


def strip_noncontent(raw: str | bytes) -> tuple[str, dict[int, list[str]]]:
    """Remove code blocks, table rows, and figure-caption lines from a document.

    Fenced blocks (``` ... ```), runs of lines indented by four or more
    spaces (or a tab), lines with two or more '|' separators, and lines
    starting with "Figure"/"Fig." are dropped; removed regions act as
    paragraph boundaries. Inline mentions like "Figure 3" survive in the
    prose and are additionally reported per clean-text paragraph index.

    Bytes input is decoded as UTF-8; a bad byte raises UnicodeDecodeError,
    whose message names the offending byte offset.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")

    kept: list[str] = []
    in_fence = False
    for line in raw.splitlines():
        if _FENCE_RE.match(line):
            in_fence = not in_fence
            kept.append("")
            continue
        if in_fence:
            continue
        if not line.strip():
            kept.append("")
            continue
        if _CODE_LINE_RE.match(line) or line.count("|") >= 2 or _FIGURE_CAPTION_RE.match(line.lstrip()):
            kept.append("")
            continue
        kept.append(line)

    clean = "\n".join(kept)
    refs: dict[int, list[str]] = {}
    for i, paragraph in enumerate(split_paragraphs(clean)):
        found: list[str] = []
        for m in _FIGURE_REF_RE.finditer(paragraph):
            label = re.sub(r"\s+", " ", m.group(0))
            if label not in found:
                found.append(label)
        if found:
            refs[i] = found
    return clean, refs


def split_paragraphs(clean: str) -> list[str]:
    """Split preprocessed text on runs of blank lines; trim, drop empties."""
    paragraphs: list[str] = []
    current: list[str] = []
    for line in clean.splitlines():
        if line.strip():
            current.append(line)
        elif current:
            paragraphs.append("\n".join(current).strip())
            current = []
    if current:
        paragraphs.append("\n".join(current).strip())
    return [p for p in paragraphs if p]


def ingest_lesson(raw: str | bytes, lang: str, lesson: int) -> list[AnswerParagraph]:
    """Turn one raw lesson document into answer paragraphs with dense ordinals."""
    if lang not in SUPPORTED_LANGUAGES:
        raise CorpusError(f"unsupported language {lang!r}; expected one of {SUPPORTED_LANGUAGES}")
    if lesson < 1:
        raise CorpusError(f"lesson number must be >= 1, got {lesson}")
    clean, refs = strip_noncontent(raw)
    out = []
    for ordinal, text in enumerate(split_paragraphs(clean)):
        out.append(
            AnswerParagraph(
                id=f"{lang}-L{lesson}-P{ordinal:02d}",
                lang=lang,
                lesson=lesson,
                ordinal=ordinal,
                text=text,
                figure_refs=refs.get(ordinal, []),
            )
        )
    return out


def save_bank(bank: AnswerBank, path: str | Path) -> None:
    """Write a bank as UTF-8 JSON lines, one paragraph per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in bank.paragraphs:
            fh.write(json.dumps(p.to_record(), ensure_ascii=False) + "\n")


def load_bank(path: str | Path) -> AnswerBank:
    paragraphs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                paragraphs.append(
                    AnswerParagraph(
                        id=rec["id"],
                        lang=rec["lang"],
                        lesson=int(rec["lesson"]),
                        ordinal=int(rec["ordinal"]),
                        text=rec["text"],
                        figure_refs=list(rec.get("figure_refs", [])),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}: malformed bank record on line {lineno}: {exc}") from exc
    bank = AnswerBank(paragraphs)
    bank.validate()
    return bank


def load_qa_pairs(path: str | Path, bank: AnswerBank) -> QASet:
    """Load question/answer pairs from JSON lines and validate against a bank.

    Every gold id must resolve to a bank paragraph whose language matches
    the pair; a dangling or cross-language id is reported with its qid.
    """
    pairs: list[QAPair] = []
    seen_qids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                pair = QAPair(
                    qid=rec["qid"],
                    lang=rec["lang"],
                    qtype=rec["qtype"],
                    question=rec["question"],
                    gold_ids=list(rec["gold_ids"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}: malformed QA record on line {lineno}: {exc}") from exc
            if pair.qtype not in ("quiz", "student"):
                raise CorpusError(f"{path}: line {lineno}: unknown question type {pair.qtype!r}")
            if not pair.gold_ids:
                raise CorpusError(f"{path}: line {lineno}: pair {pair.qid!r} has no gold ids")
            if pair.qid in seen_qids:
                raise CorpusError(f"{path}: line {lineno}: duplicate qid {pair.qid!r}")
            seen_qids.add(pair.qid)
            for gid in pair.gold_ids:
                try:
                    gold = bank.get(gid)
                except KeyError:
                    raise CorpusError(f"pair {pair.qid!r} references unknown paragraph id {gid!r}") from None
                if gold.lang != pair.lang:
                    raise CorpusError(
                        f"pair {pair.qid!r} ({pair.lang}) references paragraph {gid!r} of language {gold.lang!r}"
                    )
            pairs.append(pair)
    return QASet(pairs)


def split_sentences(text: str) -> list[str]:
    """Split on sentence punctuation followed by whitespace.

    Fragments shorter than two tokens merge into the neighbouring sentence,
    which keeps abbreviations like "Fig." or "e.g." from opening a bogus
    sentence of their own.
    """
    rough = [frag.strip() for frag in _SENTENCE_SPLIT_RE.split(text) if frag.strip()]
    sentences: list[str] = []
    buf = ""
    for frag in rough:
        buf = f"{buf} {frag}".strip()
        if len(buf.split()) >= 2:
            sentences.append(buf)
            buf = ""
    if buf:
        if sentences:
            sentences[-1] = f"{sentences[-1]} {buf}"
        else:
            sentences.append(buf)
    return sentences


def generate_triplets(bank: AnswerBank, lang: str, seed: int) -> TripletSet:
    """Mine (anchor, positive, negative) sentence triples for one language.

    Each sentence anchors one triplet with the sentence that follows it in
    the same paragraph as the positive; the negative is drawn uniformly
    from a uniformly chosen *other* paragraph. Output is a pure function
    of (bank, lang, seed).
    """
    paragraphs = bank.subset(lang)
    if len(paragraphs) < 2:
        raise CorpusError(
            f"insufficient negatives: need at least 2 paragraphs in {lang!r}, found {len(paragraphs)}"
        )
    sentences = [split_sentences(p.text) for p in paragraphs]
    rng = random.Random(seed)
    triplets: list[Triplet] = []
    for i, para in enumerate(paragraphs):
        others = [j for j in range(len(paragraphs)) if j != i]
        for s in range(len(sentences[i]) - 1):
            j = rng.choice(others)
            negative = rng.choice(sentences[j])
            triplets.append(
                Triplet(
                    anchor=sentences[i][s],
                    positive=sentences[i][s + 1],
                    negative=negative,
                    anchor_paragraph=para.id,
                    negative_paragraph=paragraphs[j].id,
                )
            )
    return TripletSet(triplets=triplets, seed=seed, lang=lang)


def split_triplets(
    triplet_set: TripletSet, train_fraction: float = 0.75, seed: int | None = None
) -> tuple[TripletSet, TripletSet]:
    """Seeded shuffle, then cut at round(n * train_fraction)."""
    if not 0 < train_fraction < 1:
        raise CorpusError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if seed is None:
        seed = triplet_set.seed
    shuffled = list(triplet_set.triplets)
    random.Random(seed).shuffle(shuffled)
    cut = round(len(shuffled) * train_fraction)
    train = TripletSet(shuffled[:cut], seed=seed, lang=triplet_set.lang)
    test = TripletSet(shuffled[cut:], seed=seed, lang=triplet_set.lang)
    return train, test


def save_triplets(triplet_set: TripletSet, path: str | Path) -> None:
    """Export triplets as JSON lines behind a line-0 metadata record."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        meta = {"seed": triplet_set.seed, "lang": triplet_set.lang, "count": len(triplet_set.triplets)}
        fh.write(json.dumps(meta, ensure_ascii=False) + "\n")
        for t in triplet_set.triplets:
            rec = {"anchor": t.anchor, "positive": t.positive, "negative": t.negative}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
