"""HTTP client for an external sentence-embedding provider.

The dense backend needs query vectors at ask time; answers were embedded
offline, but the question arrives live and is sent to a sidecar service.
Transport problems (connect/timeout) and provider-side faults (non-2xx,
bad payload shape) raise distinct errors so callers can map them to
different responses.
"""

from __future__ import annotations

import numpy as np
import httpx


class ProviderError(RuntimeError):
    """Base class for embedding-provider failures."""


class ProviderTransportError(ProviderError):
    """The provider could not be reached (DNS, connect, timeout)."""


class ProviderFault(ProviderError):
    """The provider answered but with an error or a malformed payload."""


class HttpEmbeddingClient:
    def __init__(self, base_url: str, timeout_ms: int = 5000, model_tag: str | None = None):
        if timeout_ms <= 0:
            raise ValueError(f"provider timeout must be positive, got {timeout_ms}")
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout_ms / 1000.0
        self.model_tag = model_tag

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        """POST the texts to /embed; vectors come back in request order."""
        body: dict = {"texts": texts}
        if self.model_tag:
            body["model_tag"] = self.model_tag
        try:
            response = httpx.post(f"{self.base_url}/embed", json=body, timeout=self.timeout)
        except httpx.HTTPError as exc:
            raise ProviderTransportError(
                f"embedding provider {self.base_url} unreachable: {exc}"
            ) from exc
        if response.status_code != 200:
            raise ProviderFault(
                f"embedding provider {self.base_url} returned {response.status_code}: "
                f"{response.text[:200]}"
            )
        try:
            vectors = response.json()["vectors"]
        except (ValueError, KeyError) as exc:
            raise ProviderFault(f"embedding provider {self.base_url} sent a malformed body") from exc
        if len(vectors) != len(texts):
            raise ProviderFault(
                f"embedding provider {self.base_url} returned {len(vectors)} vectors "
                f"for {len(texts)} texts"
            )
        return [np.asarray(v, dtype=np.float64) for v in vectors]

    def embed_one(self, text: str) -> np.ndarray:
        return self.embed([text])[0]
