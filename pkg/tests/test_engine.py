from __future__ import annotations

import numpy as np
import pytest

from kwame.engine import (
    NO_CONFIDENT_ANSWER,
    AskRequest,
    MissingIndexError,
    QAEngine,
    parse_tags,
)
from kwame.retrieval import VectorIndex

from .conftest import make_bank


# -- parse_tags ---------------------------------------------------------------


def test_parse_tag_removed_and_number_returned():
    assert parse_tags("#lesson1 what is setup()?") == ("what is setup()?", 1)


def test_parse_no_tag_leaves_question_unchanged():
    question = "what is  setup()?"
    assert parse_tags(question) == (question, None)


def test_parse_first_tag_wins():
    assert parse_tags("#lesson2 #lesson3 q") == ("q", 2)


def test_parse_tag_case_insensitive_and_positional():
    assert parse_tags("what is draw? #LESSON2") == ("what is draw?", 2)


def test_parse_tag_must_be_whole_token():
    assert parse_tags("see #lesson1x notes") == ("see #lesson1x notes", None)


# -- ask ----------------------------------------------------------------------


def test_ask_self_text_scores_one(engine, bank):
    paragraph = bank.get("en-L1-P03")
    response = engine.ask(AskRequest(question=paragraph.text, top_k=1, backend="tfidf"))
    assert response.answered
    assert response.lang_detected == "en"
    hit = response.answers[0]
    assert (hit.id, hit.rank) == ("en-L1-P03", 1)
    assert hit.score == pytest.approx(1.0, abs=1e-6)
    assert hit.text == paragraph.text


def test_ask_threshold_above_any_possible_score(engine, bank):
    paragraph = bank.get("en-L1-P03")
    response = engine.ask(
        AskRequest(question=paragraph.text, top_k=1, backend="tfidf", threshold=1.0)
    )
    assert response.answered  # identical text reaches 1.0
    # A cutoff no cosine can clear flips the decision.
    response = engine.ask(
        AskRequest(question="circle " + paragraph.text, top_k=1, backend="tfidf", threshold=1.0)
    )
    assert not response.answered
    assert response.answers == []
    assert response.message == NO_CONFIDENT_ANSWER


def test_ask_lesson_tag_filters_results(engine):
    response = engine.ask(
        AskRequest(question="#lesson1 how does the draw function run?", top_k=10, backend="tfidf")
    )
    assert response.answered
    assert all(a.id.startswith("en-L1-") for a in response.answers)


def test_ask_explicit_lesson_field_filters(engine):
    response = engine.ask(
        AskRequest(question="how does the loop repeat drawing?", top_k=10, lesson_tag=2, backend="tfidf")
    )
    assert response.answered
    assert all(a.id.startswith("en-L2-") for a in response.answers)


def test_ask_routes_french_question_to_french_bank(engine):
    response = engine.ask(
        AskRequest(question="Comment déclarer une variable avec une valeur de départ ?", top_k=3)
    )
    assert response.lang_detected == "fr"
    assert all(a.id.startswith("fr-") for a in response.answers)


def test_ask_override_dominates_detection(engine):
    # Same question with forced language must equal asking the fr index directly.
    question = "Comment déclarer une variable ?"
    detected = engine.ask(AskRequest(question=question, top_k=3))
    forced = engine.ask(AskRequest(question=question, top_k=3, lang_override="fr"))
    assert detected.lang_detected == "fr"
    assert [a.id for a in detected.answers] == [a.id for a in forced.answers]
    forced_en = engine.ask(AskRequest(question=question, top_k=3, lang_override="en"))
    assert forced_en.lang_detected == "en"
    assert all(a.id.startswith("en-") for a in forced_en.answers)


def test_ask_missing_index_names_language(bank):
    engine = QAEngine(bank)
    engine.add_tfidf_index("en")
    with pytest.raises(MissingIndexError, match="'fr'"):
        engine.ask(AskRequest(question="Comment dessiner un cercle sur l'écran ?"))


def test_ask_zero_signal_question_not_answered(engine):
    response = engine.ask(AskRequest(question="zzzz qqqq wwww", top_k=3, backend="tfidf"))
    assert not response.answered
    assert response.answers == []
    assert response.message is not None


def test_ask_is_deterministic(engine):
    req = AskRequest(question="how do I draw a circle?", top_k=5, backend="hash")
    assert engine.ask(req) == engine.ask(req)


def test_ask_threshold_monotonicity(engine, bank):
    question = "how do I draw a circle on the screen?"
    thresholds = [None, 0.0, 0.2, 0.5, 0.9, 1.0]
    answered_flags = []
    answer_sets = []
    for threshold in thresholds:
        response = engine.ask(
            AskRequest(question=question, top_k=5, backend="tfidf", threshold=threshold)
        )
        answered_flags.append(response.answered)
        answer_sets.append({a.id for a in response.answers})
    # Raising the threshold can only flip answered True -> False.
    for earlier, later in zip(answered_flags, answered_flags[1:]):
        assert earlier or not later
    for earlier, later in zip(answer_sets, answer_sets[1:]):
        assert later <= earlier


def test_filter_soundness_superset_without_tag(engine):
    question = "how does the draw function repeat?"
    tagged = engine.ask(AskRequest(question=f"#lesson1 {question}", top_k=50, backend="tfidf"))
    untagged = engine.ask(AskRequest(question=question, top_k=50, backend="tfidf"))
    assert all(a.id.startswith("en-L1-") for a in tagged.answers)
    assert {a.id for a in tagged.answers} <= {a.id for a in untagged.answers}


def test_ask_request_validation():
    with pytest.raises(ValueError):
        AskRequest(question="q", top_k=0)
    with pytest.raises(ValueError):
        AskRequest(question="q", threshold=1.5)


def test_dense_entry_uses_query_embedder(bank):
    subset = bank.subset("en")
    rng = np.random.default_rng(0)
    vectors = {p.id: rng.normal(size=16) for p in subset}
    matrix = np.vstack([vectors[p.id] for p in subset])
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    index = VectorIndex(
        lang="en", backend="dense", dim=16,
        ids=[p.id for p in subset], vectors=matrix, paragraphs=subset,
    )
    engine = QAEngine(bank)
    target = subset[2]
    engine.add_dense_index("en", index, query_embedder=lambda text: vectors[target.id])
    response = engine.ask(AskRequest(question="anything", lang_override="en", backend="dense", top_k=1))
    assert response.answers[0].id == target.id
    assert response.answers[0].score == pytest.approx(1.0, abs=1e-9)
