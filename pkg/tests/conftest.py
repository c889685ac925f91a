from __future__ import annotations

import json
from pathlib import Path

import pytest

from kwame.corpus import AnswerBank, QAPair, QASet, ingest_lesson
from kwame.engine import QAEngine

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def bank() -> AnswerBank:
    """Bilingual two-lesson bank built from the fixture documents."""
    paragraphs = []
    for lang in ("en", "fr"):
        for lesson in (1, 2):
            raw = (DATA_DIR / f"lesson{lesson}_{lang}.md").read_bytes()
            paragraphs.extend(ingest_lesson(raw, lang=lang, lesson=lesson))
    bank = AnswerBank(paragraphs)
    bank.validate()
    return bank


@pytest.fixture(scope="session")
def qaset(bank: AnswerBank) -> QASet:
    """Quiz and student questions keyed to fixture paragraphs."""
    pairs = [
        QAPair("q-en-1", "en", "quiz", "How do I draw a circle at the center of my screen?", ["en-L1-P01"]),
        QAPair("q-en-2", "en", "quiz", "What does the setup function do when the sketch starts?", ["en-L1-P02"]),
        QAPair("q-en-3", "en", "quiz", "How do I declare a variable with a starting value?", ["en-L1-P03"]),
        QAPair("q-en-4", "en", "quiz", "How are colors made from red, green and blue numbers?", ["en-L1-P04"]),
        QAPair("q-en-5", "en", "quiz", "How can a shape follow the mouse pointer?", ["en-L2-P01"]),
        QAPair("s-en-1", "en", "student", "my screen stays black and nothing draws, any idea please?", ["en-L1-P02", "en-L1-P04"]),
        QAPair("s-en-2", "en", "student", "what does the error about a missing semicolon mean", ["en-L1-P05"]),
        QAPair("s-en-3", "en", "student", "how to repeat drawing without writing it ten times", ["en-L2-P00"]),
        QAPair("q-fr-1", "fr", "quiz", "Comment est-ce que je dessine un cercle au centre de l'écran ?", ["fr-L1-P01"]),
        QAPair("q-fr-2", "fr", "quiz", "À quoi sert la fonction setup au démarrage du programme ?", ["fr-L1-P02"]),
        QAPair("q-fr-3", "fr", "quiz", "Comment déclarer une variable avec une valeur de départ ?", ["fr-L1-P03"]),
        QAPair("q-fr-4", "fr", "quiz", "Comment les couleurs sont-elles faites de rouge, vert et bleu ?", ["fr-L1-P04"]),
        QAPair("q-fr-5", "fr", "quiz", "Comment une forme peut-elle suivre la souris ?", ["fr-L2-P01"]),
        QAPair("s-fr-1", "fr", "student", "mon écran reste noir et rien ne se dessine, une idée ?", ["fr-L1-P02", "fr-L1-P04"]),
        QAPair("s-fr-2", "fr", "student", "que veut dire l'erreur sur le point-virgule manquant", ["fr-L1-P05"]),
        QAPair("s-fr-3", "fr", "student", "comment répéter un dessin sans l'écrire dix fois", ["fr-L2-P00"]),
    ]
    return QASet(pairs)


@pytest.fixture(scope="session")
def engine(bank: AnswerBank) -> QAEngine:
    engine = QAEngine(bank)
    for lang in ("en", "fr"):
        engine.add_tfidf_index(lang)
        engine.add_hash_index(lang, dim=512, seed=7)
    return engine


@pytest.fixture(scope="session")
def language_fixture() -> list[dict]:
    rows = []
    for line in (DATA_DIR / "language_questions.jsonl").read_text(encoding="utf-8").splitlines():
        if line.strip():
            rows.append(json.loads(line))
    return rows


def make_paragraph_texts(n: int, lang: str = "en") -> list[str]:
    """Distinct multi-sentence paragraph texts for synthetic banks."""
    en_stems = [
        "The {0} function draws on the screen. Call it with {1} numbers to place the shape.",
        "A {0} variable stores the {1} value. Change it each frame to animate the sketch.",
        "Lesson text about {0} number {1}. It explains the idea with one small example.",
    ]
    fr_stems = [
        "La fonction {0} dessine sur l'écran. Appelez-la avec {1} nombres pour placer la forme.",
        "Une variable {0} garde la valeur {1}. Changez-la à chaque image pour animer le dessin.",
        "Texte de leçon sur {0} numéro {1}. Il explique l'idée avec un petit exemple.",
    ]
    stems = en_stems if lang == "en" else fr_stems
    words = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"]
    return [
        stems[i % len(stems)].format(words[i % len(words)] + str(i), i)
        for i in range(n)
    ]


def make_bank(n: int, lang: str = "en", lesson: int = 1) -> AnswerBank:
    document = "\n\n".join(make_paragraph_texts(n, lang))
    return AnswerBank(ingest_lesson(document, lang=lang, lesson=lesson))


def gold_aligned_engine(bank: AnswerBank, qaset: QASet, dim: int = 32, seed: int = 0) -> QAEngine:
    """Engine with a mock dense backend where each question's vector equals
    its first gold paragraph's vector, so rank 1 is the gold answer by
    construction."""
    import numpy as np

    from kwame.retrieval import VectorIndex

    rng = np.random.default_rng(seed)
    engine = QAEngine(bank)
    vectors = {}
    for lang in sorted(bank.languages):
        subset = bank.subset(lang)
        matrix = rng.normal(size=(len(subset), dim))
        matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
        for p, row in zip(subset, matrix):
            vectors[p.id] = row
        index = VectorIndex(
            lang=lang, backend="dense", dim=dim,
            ids=[p.id for p in subset], vectors=matrix, paragraphs=subset,
        )
        question_to_vector = {
            pair.question: vectors[pair.gold_ids[0]] for pair in qaset.filter(lang=lang)
        }
        engine.add_dense_index(
            lang, index, query_embedder=lambda text, m=question_to_vector: m[text]
        )
    return engine
