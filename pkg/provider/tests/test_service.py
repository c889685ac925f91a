from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from embed_provider.service import MAX_TEXT_CHARS, create_app


@pytest.fixture()
def client():
    app = create_app("hashed-64")
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


def test_health_reports_model(client):
    body = client.get("/health").json()
    assert body == {"status": "ok", "model_tag": "hashed-64", "dim": 64}


def test_embed_shape_contract_on_probe(client):
    texts = [f"probe sentence number {i}" for i in range(10)]
    response = client.post("/embed", json={"texts": texts})
    assert response.status_code == 200
    body = response.json()
    assert len(body["vectors"]) == 10
    assert body["dim"] == 64
    assert all(len(v) == 64 for v in body["vectors"])
    assert all(all(isinstance(x, float) for x in v) for v in body["vectors"])


def test_embed_is_deterministic_and_order_preserving(client):
    texts = ["alpha", "beta", "alpha"]
    first = client.post("/embed", json={"texts": texts}).json()
    second = client.post("/embed", json={"texts": texts}).json()
    assert first["vectors"] == second["vectors"]
    assert first["vectors"][0] == first["vectors"][2]
    assert first["vectors"][0] != first["vectors"][1]


def test_embed_empty_texts_is_400(client):
    response = client.post("/embed", json={"texts": []})
    assert response.status_code == 400
    assert response.json()["error"]["code"] == "empty_texts"


def test_embed_oversize_text_is_413(client):
    response = client.post("/embed", json={"texts": ["x" * (MAX_TEXT_CHARS + 1)]})
    assert response.status_code == 413
    assert response.json()["error"]["code"] == "text_too_large"


def test_embed_model_mismatch_is_400(client):
    response = client.post("/embed", json={"texts": ["a"], "model_tag": "other-model"})
    assert response.status_code == 400
    assert response.json()["error"]["code"] == "model_mismatch"


def test_embed_matching_model_tag_ok(client):
    response = client.post("/embed", json={"texts": ["a"], "model_tag": "hashed-64"})
    assert response.status_code == 200


def test_unloadable_model_gives_503():
    app = create_app("hashed-2")  # dim below the encoder's floor
    with TestClient(app, raise_server_exceptions=False) as client:
        assert client.get("/health").json()["status"] == "degraded"
        response = client.post("/embed", json={"texts": ["a"]})
        assert response.status_code == 503
        assert response.json()["error"]["code"] == "model_unavailable"
