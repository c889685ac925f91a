"""Encoders behind the /embed endpoint.

Two families share one interface: a multilingual sentence-transformers
checkpoint (the production choice, tag = any HF model name) and a
self-contained hashed character-n-gram encoder (tag "hashed-<dim>") that
needs no model download. The hashed encoder keeps the full wire protocol
and export pipeline testable on machines with no model cache or network.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

DEFAULT_MODEL_TAG = "sentence-transformers/paraphrase-multilingual-MiniLM-L12-v2"

_HASHED_TAG_RE = re.compile(r"^hashed-(\d+)$")
_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


class ModelLoadError(RuntimeError):
    """The configured model tag could not be loaded."""


class HashedEncoder:
    """Deterministic signed feature hash over word and character n-grams.

    Not a semantic model: it is the provider's offline stand-in, exercising
    the exact request/response and export paths the real checkpoint uses.
    """

    def __init__(self, dim: int):
        if dim < 8:
            raise ModelLoadError(f"hashed encoder dim must be >= 8, got {dim}")
        self.dim = dim
        self.model_tag = f"hashed-{dim}"

    def _features(self, text: str):
        tokens = _TOKEN_RE.findall(text.lower())
        yield from tokens
        yield from (f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
        for token in tokens:
            padded = f"^{token}$"
            for size in (3, 4):
                for i in range(max(0, len(padded) - size + 1)):
                    yield padded[i : i + size]

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for row, text in enumerate(texts):
            for feature in self._features(text):
                digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=9).digest()
                bucket = int.from_bytes(digest[:8], "big") % self.dim
                out[row, bucket] += 1.0 if digest[8] & 1 else -1.0
        return out


class SentenceTransformerEncoder:
    def __init__(self, model_tag: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ModelLoadError("sentence-transformers is not installed") from exc
        try:
            self._model = SentenceTransformer(model_tag)
        except Exception as exc:
            raise ModelLoadError(f"could not load model {model_tag!r}: {exc}") from exc
        self.model_tag = model_tag
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: list[str]) -> np.ndarray:
        vectors = self._model.encode(texts, convert_to_numpy=True, show_progress_bar=False)
        return np.asarray(vectors, dtype=np.float64)


def load_encoder(model_tag: str = DEFAULT_MODEL_TAG):
    """Resolve a model tag to an encoder; raises ModelLoadError on failure."""
    m = _HASHED_TAG_RE.match(model_tag)
    if m:
        return HashedEncoder(int(m.group(1)))
    return SentenceTransformerEncoder(model_tag)
