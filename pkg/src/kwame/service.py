"""HTTP service exposing the QA engine under /v1.

Endpoints:
  POST /v1/ask       ask a question, returns ranked answers + interaction id
  POST /v1/feedback  up/down vote on a previous interaction
  GET  /v1/health    liveness + loaded languages/backends

All error bodies share the shape {"error": {"code", "message"}}. Indexes
load at startup and fail fast; the engine is immutable afterwards, so
request handling is freely concurrent. Interactions are appended to a
JSON-lines log through a single writer lock.
"""

from __future__ import annotations

import json
import logging
import threading
import time
import uuid
from collections import OrderedDict
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import ServiceConfig
from .corpus import load_bank
from .engine import AskRequest, MissingIndexError, QAEngine
from .providers import HttpEmbeddingClient, ProviderFault, ProviderTransportError
from .retrieval import load_dense_index

logger = logging.getLogger("kwame.service")

LOG_WINDOW = 1000


class AskBody(BaseModel):
    question: str
    top_k: int | None = None
    lang: str | None = None
    lesson: int | None = None
    threshold: float | None = None
    backend: str | None = None


class AnswerModel(BaseModel):
    id: str
    text: str
    figure_refs: list[str]
    score: float
    rank: int


class AskReply(BaseModel):
    lang_detected: str
    answered: bool
    answers: list[AnswerModel]
    message: str | None = None
    interaction_id: str


class FeedbackBody(BaseModel):
    interaction_id: str
    vote: str


@dataclass
class InteractionLog:
    """Append-only interaction records with an in-memory feedback window."""

    path: str | None = None
    window: int = LOG_WINDOW
    _records: OrderedDict = field(default_factory=OrderedDict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def _append_line(self, record: dict) -> None:
        if self.path is None:
            return
        with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    def record_ask(
        self,
        question: str,
        lang_detected: str,
        backend: str,
        answers: list[dict],
        answered: bool,
        latency_ms: float,
    ) -> str:
        interaction_id = uuid.uuid4().hex
        record = {
            "type": "ask",
            "interaction_id": interaction_id,
            "timestamp": time.time(),
            "question": question,
            "lang_detected": lang_detected,
            "backend": backend,
            "answers": answers,
            "answered": answered,
            "latency_ms": latency_ms,
            "feedback": None,
        }
        with self._lock:
            self._records[interaction_id] = record
            while len(self._records) > self.window:
                self._records.popitem(last=False)
            self._append_line(record)
        return interaction_id

    def record_feedback(self, interaction_id: str, vote: str) -> bool:
        """Attach a vote to a recorded interaction; last write wins."""
        with self._lock:
            record = self._records.get(interaction_id)
            if record is None:
                return False
            record["feedback"] = vote
            self._append_line(
                {
                    "type": "feedback",
                    "interaction_id": interaction_id,
                    "timestamp": time.time(),
                    "vote": vote,
                }
            )
        return True

    def get(self, interaction_id: str) -> dict | None:
        with self._lock:
            return self._records.get(interaction_id)


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def build_engine_from_config(config: ServiceConfig) -> QAEngine:
    """Load the bank and all configured indexes; any failure aborts startup."""
    if not config.bank_path:
        raise ValueError("service config does not name a bank file")
    bank = load_bank(config.bank_path)
    if not bank.languages:
        raise ValueError(f"bank {config.bank_path!r} contains no paragraphs")
    engine = QAEngine(bank)
    provider = (
        HttpEmbeddingClient(config.provider_url, timeout_ms=config.provider_timeout_ms)
        if config.provider_url
        else None
    )
    for lang in sorted(bank.languages):
        engine.add_tfidf_index(lang)
        engine.add_hash_index(lang, dim=config.hash_dim, seed=config.hash_seed)
        vectors_path = config.vectors.get(lang)
        if vectors_path:
            if provider is None:
                raise ValueError(
                    f"dense vectors configured for {lang!r} but no provider_url is set "
                    "(questions could not be embedded)"
                )
            index = load_dense_index(vectors_path, bank, lang)
            engine.add_dense_index(lang, index, provider.embed_one)
    return engine


def create_app(config: ServiceConfig, engine: QAEngine | None = None) -> FastAPI:
    config.validate()
    if engine is None:
        engine = build_engine_from_config(config)
    log = InteractionLog(path=config.log_path)

    app = FastAPI(title="kwame", version="1")
    app.state.engine = engine
    app.state.interaction_log = log

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request: Request, exc: RequestValidationError):
        return _error(400, "malformed_request", str(exc.errors()[:3]))

    @app.exception_handler(Exception)
    async def unhandled(request: Request, exc: Exception):
        logger.exception("unhandled error")
        return _error(500, "internal_error", str(exc))

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "languages": engine.languages(),
            "backends": engine.backends(),
        }

    @app.post("/v1/ask")
    def ask(body: AskBody):
        backend = body.backend or config.default_backend
        if backend not in engine.backends():
            return _error(422, "unsupported_backend", f"backend {backend!r} is not loaded")
        if body.lang is not None and body.lang not in engine.languages():
            return _error(422, "unsupported_language", f"language {body.lang!r} is not loaded")
        threshold = body.threshold if body.threshold is not None else config.threshold
        try:
            req = AskRequest(
                question=body.question,
                top_k=body.top_k if body.top_k is not None else config.default_top_k,
                lang_override=body.lang,
                lesson_tag=body.lesson,
                threshold=threshold,
                backend=backend,
            )
        except ValueError as exc:
            return _error(400, "malformed_request", str(exc))

        start = time.perf_counter()
        try:
            response = engine.ask(req)
        except ProviderTransportError as exc:
            return _error(502, "provider_unreachable", str(exc))
        except ProviderFault as exc:
            return _error(502, "provider_error", str(exc))
        except MissingIndexError as exc:
            return _error(422, "unsupported_language", str(exc))
        latency_ms = (time.perf_counter() - start) * 1000.0

        answers = [
            {
                "id": hit.id,
                "text": hit.text,
                "figure_refs": hit.figure_refs,
                "score": hit.score,
                "rank": hit.rank,
            }
            for hit in response.answers
        ]
        interaction_id = log.record_ask(
            question=body.question,
            lang_detected=response.lang_detected,
            backend=backend,
            answers=[{"id": a["id"], "score": a["score"]} for a in answers],
            answered=response.answered,
            latency_ms=latency_ms,
        )
        return AskReply(
            lang_detected=response.lang_detected,
            answered=response.answered,
            answers=[AnswerModel(**a) for a in answers],
            message=response.message,
            interaction_id=interaction_id,
        )

    @app.post("/v1/feedback")
    def feedback(body: FeedbackBody):
        if body.vote not in ("up", "down"):
            return _error(400, "malformed_request", f"vote must be 'up' or 'down', got {body.vote!r}")
        if not log.record_feedback(body.interaction_id, body.vote):
            return _error(404, "unknown_interaction", f"interaction {body.interaction_id!r} not found")
        return {"ok": True}

    return app


def serve(config: ServiceConfig) -> None:
    """Build the app (fail-fast on bad indexes) and block serving it."""
    import uvicorn

    app = create_app(config)
    logger.info("serving on %s:%s", config.host, config.port)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
