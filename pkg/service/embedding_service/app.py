"""Sentence-embedding microservice.

Wire format (matching the usagekit remote-service backend):

    POST /embed   {"texts": [str, ...]}
                  -> 200 {"vectors": [[float x 768], ...], "model": str}
    GET  /health  -> 200 {"model": str} once the model is loaded, 503 before

Vectors are L2-normalized and the response order matches the request order.
The model loads once at startup; inference is serialized behind a lock so
concurrent requests cannot interleave encoder calls. Errors: 400 for a
malformed body, 413 when the batch exceeds the cap, 503 while no model is
available.

Environment:
    EMBEDDING_SERVICE_MODEL      checkpoint name
                                 (default sentence-transformers/all-mpnet-base-v2)
    EMBEDDING_SERVICE_BATCH_CAP  max texts per request (default 64)
    EMBEDDING_SERVICE_FAKE       "1" swaps in an offline deterministic
                                 hashing encoder (for contract tests and
                                 development without model weights)
"""

from __future__ import annotations

import os
import threading
from contextlib import asynccontextmanager

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

DEFAULT_MODEL = "sentence-transformers/all-mpnet-base-v2"
DEFAULT_BATCH_CAP = 64
EMBEDDING_DIM = 768


class EmbedRequest(BaseModel):
    texts: list[str]


class EmbedResponse(BaseModel):
    vectors: list[list[float]]
    model: str


class SentenceTransformerEncoder:
    """The real model. Loaded lazily so the app can come up (and report 503)
    even while weights are still downloading or unavailable."""

    def __init__(self, model_name: str = DEFAULT_MODEL):
        from sentence_transformers import SentenceTransformer

        self.name = model_name
        self._model = SentenceTransformer(model_name)

    def encode(self, texts: list[str]) -> np.ndarray:
        return np.asarray(
            self._model.encode(texts, normalize_embeddings=True, show_progress_bar=False),
            dtype=float,
        )


class HashingEncoder:
    """Offline stand-in with the service's exact response contract:
    768-dim character-trigram FNV-1a hashing, unit norm, deterministic.
    No semantics; only for contract tests and development."""

    def __init__(self):
        self.name = "deterministic-hashing-768"

    @staticmethod
    def _hash(data: bytes) -> int:
        h = 14695981039346656037
        for byte in data:
            h = ((h ^ byte) * 1099511628211) % 2**64
        return h

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), EMBEDDING_DIM))
        for row, text in enumerate(texts):
            padded = "#" + text.lower() + "#"
            for i in range(len(padded) - 2):
                h = self._hash(padded[i : i + 3].encode("utf-8"))
                sign = 1.0 if (h >> 32) & 1 == 0 else -1.0
                out[row, h % EMBEDDING_DIM] += sign
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
        return out


def _default_encoder_factory():
    if os.environ.get("EMBEDDING_SERVICE_FAKE") == "1":
        return HashingEncoder()
    return SentenceTransformerEncoder(os.environ.get("EMBEDDING_SERVICE_MODEL", DEFAULT_MODEL))


def create_app(encoder_factory=None, batch_cap: int | None = None) -> FastAPI:
    factory = encoder_factory or _default_encoder_factory
    cap = batch_cap or int(os.environ.get("EMBEDDING_SERVICE_BATCH_CAP", DEFAULT_BATCH_CAP))

    state = {"encoder": None, "error": None}
    inference_lock = threading.Lock()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        try:
            state["encoder"] = factory()
        except Exception as exc:  # keep serving 503s instead of crashing
            state["error"] = str(exc)
        yield

    app = FastAPI(title="usagekit embedding service", lifespan=lifespan)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed request body"})

    @app.get("/health")
    async def health():
        encoder = state["encoder"]
        if encoder is None:
            detail = state["error"] or "model not loaded yet"
            return JSONResponse(status_code=503, content={"detail": detail})
        return {"model": encoder.name}

    @app.post("/embed", response_model=EmbedResponse)
    async def embed(request: EmbedRequest):
        encoder = state["encoder"]
        if encoder is None:
            detail = state["error"] or "model not loaded yet"
            return JSONResponse(status_code=503, content={"detail": detail})
        if len(request.texts) > cap:
            return JSONResponse(
                status_code=413,
                content={"detail": f"batch of {len(request.texts)} exceeds cap {cap}"},
            )
        if not request.texts:
            return EmbedResponse(vectors=[], model=encoder.name)
        with inference_lock:
            vectors = encoder.encode(request.texts)
        return EmbedResponse(vectors=[[float(x) for x in row] for row in vectors],
                             model=encoder.name)

    return app


def main():  # pragma: no cover - manual entry point
    import uvicorn

    uvicorn.run(create_app(), host="0.0.0.0", port=int(os.environ.get("EMBEDDING_SERVICE_PORT", 8601)))


if __name__ == "__main__":  # pragma: no cover
    main()
