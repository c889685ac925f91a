"""HTTP surface of the embedding provider.

POST /embed takes a non-empty list of texts and returns one raw vector per
text, order-preserving, plus the dimension and the loaded model tag. The
engine consuming the vectors does its own normalization. Inference is
serialized behind one lock: a single model, requests queue.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .encoder import ModelLoadError, load_encoder

MAX_TEXT_CHARS = 8192
BATCH_CHUNK = 32


class EmbedBody(BaseModel):
    texts: list[str]
    model_tag: str | None = None


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def create_app(model_tag: str | None = None) -> FastAPI:
    app = FastAPI(title="kwame-provider", version="1")
    lock = threading.Lock()
    state = {"encoder": None, "load_error": None}

    try:
        state["encoder"] = load_encoder(model_tag) if model_tag else load_encoder()
    except ModelLoadError as exc:
        # Served as 503 per request rather than crashing the process, so
        # health stays observable while the model problem is fixed.
        state["load_error"] = str(exc)

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return _error(400, "malformed_request", str(exc.errors()[:3]))

    @app.get("/health")
    def health():
        encoder = state["encoder"]
        if encoder is None:
            return {"status": "degraded", "error": state["load_error"]}
        return {"status": "ok", "model_tag": encoder.model_tag, "dim": encoder.dim}

    @app.post("/embed")
    def embed(body: EmbedBody):
        encoder = state["encoder"]
        if encoder is None:
            return _error(503, "model_unavailable", state["load_error"] or "no model loaded")
        if not body.texts:
            return _error(400, "empty_texts", "texts must be a non-empty list")
        for i, text in enumerate(body.texts):
            if len(text) > MAX_TEXT_CHARS:
                return _error(
                    413, "text_too_large",
                    f"text {i} has {len(text)} characters (limit {MAX_TEXT_CHARS})",
                )
        if body.model_tag and body.model_tag != encoder.model_tag:
            return _error(
                400, "model_mismatch",
                f"requested {body.model_tag!r} but {encoder.model_tag!r} is loaded",
            )
        vectors = []
        with lock:
            for start in range(0, len(body.texts), BATCH_CHUNK):
                chunk = body.texts[start : start + BATCH_CHUNK]
                vectors.extend(encoder.encode(chunk).tolist())
        return {"vectors": vectors, "dim": encoder.dim, "model_tag": encoder.model_tag}

    return app


def serve(model_tag: str | None, host: str, port: int) -> None:
    import uvicorn

    uvicorn.run(create_app(model_tag), host=host, port=port, log_level="info")
