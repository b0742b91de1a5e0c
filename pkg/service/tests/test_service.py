import sys
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

sys.path.insert(0, str(Path(__file__).parent.parent))

from embedding_service.app import HashingEncoder, create_app


@pytest.fixture()
def client():
    app = create_app(encoder_factory=HashingEncoder, batch_cap=8)
    with TestClient(app) as c:
        yield c


class TestHealth:
    def test_healthy_once_loaded(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json()["model"] == "deterministic-hashing-768"

    def test_stable_across_calls(self, client):
        assert client.get("/health").json() == client.get("/health").json()

    def test_503_when_model_failed_to_load(self):
        def broken():
            raise RuntimeError("weights unavailable")

        app = create_app(encoder_factory=broken)
        with TestClient(app) as client:
            assert client.get("/health").status_code == 503
            response = client.post("/embed", json={"texts": ["x"]})
            assert response.status_code == 503
            assert "weights unavailable" in response.json()["detail"]


class TestEmbed:
    def test_deterministic_for_identical_texts(self, client):
        body = {"texts": ["a", "a"]}
        vectors = client.post("/embed", json=body).json()["vectors"]
        assert vectors[0] == vectors[1]
        again = client.post("/embed", json=body).json()["vectors"]
        assert again == vectors

    def test_empty_batch(self, client):
        response = client.post("/embed", json={"texts": []})
        assert response.status_code == 200
        assert response.json()["vectors"] == []

    def test_unit_norm_and_dimension(self, client):
        vectors = client.post(
            "/embed", json={"texts": ["portable power bank", "flashlight"]}
        ).json()["vectors"]
        for vec in vectors:
            assert len(vec) == 768
            assert abs(np.linalg.norm(vec) - 1.0) < 1e-5

    def test_order_preserved(self, client):
        texts = ["one", "two", "three"]
        batch = client.post("/embed", json={"texts": texts}).json()["vectors"]
        for text, expected in zip(texts, batch):
            single = client.post("/embed", json={"texts": [text]}).json()["vectors"][0]
            assert single == expected

    def test_batch_cap_gives_413(self, client):
        response = client.post("/embed", json={"texts": ["x"] * 9})
        assert response.status_code == 413

    def test_malformed_body_gives_400(self, client):
        assert client.post("/embed", json={"nope": 1}).status_code == 400
        assert client.post("/embed", json={"texts": "not a list"}).status_code == 400
        assert client.post(
            "/embed", content=b"{broken", headers={"content-type": "application/json"}
        ).status_code == 400

    def test_response_names_model(self, client):
        body = client.post("/embed", json={"texts": ["x"]}).json()
        assert body["model"] == "deterministic-hashing-768"


class TestRemoteBackendIntegration:
    """The primary package's remote backend speaks this exact wire format."""

    def test_usagekit_remote_backend_round_trip(self, client):
        pytest.importorskip("usagekit")
        import httpx
        from usagekit.embedding import RemoteEmbedder

        def forward(request):
            response = client.post(
                "/embed",
                content=request.content,
                headers={"content-type": "application/json"},
            )
            return httpx.Response(response.status_code, json=response.json())

        backend = RemoteEmbedder("http://service/embed", transport=httpx.MockTransport(forward))
        vectors = backend.embed_batch(["grill", "smoke"])
        assert len(vectors) == 2
        assert vectors[0].shape == (768,)
        direct = client.post("/embed", json={"texts": ["grill"]}).json()["vectors"][0]
        assert np.allclose(vectors[0], direct)


def _load_real_model():
    from embedding_service.app import SentenceTransformerEncoder

    try:
        return SentenceTransformerEncoder()
    except Exception as exc:  # model weights not available in this environment
        pytest.skip(f"pretrained embedding model unavailable: {exc}")


class TestParaphraseAffinity:
    def test_paraphrase_closer_than_distractor(self):
        encoder = _load_real_model()
        app = create_app(encoder_factory=lambda: encoder)
        with TestClient(app) as client:
            vectors = client.post(
                "/embed",
                json={"texts": ["portable power bank", "mobile charging device", "flashlight"]},
            ).json()["vectors"]
        anchor, paraphrase, distractor = (np.array(v) for v in vectors)
        assert float(anchor @ paraphrase) > float(anchor @ distractor)
