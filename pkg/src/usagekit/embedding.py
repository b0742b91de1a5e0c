"""String embedding backends.

Every metric in this package consumes embeddings through the small interface
implemented here (``embed`` / ``embed_batch``), so scoring runs offline and
reproducibly. Four backends exist:

* ``deterministic-test``: a 256-dim character-trigram hashing embedder,
  fully specified so any implementation reproduces it bit for bit.
* ``exact-match``: no vectors at all; similarity is string equality. Used
  for analytic fixtures where scores must be exactly 0 or 1.
* ``file-cache``: JSON Lines cache of text -> vector, optionally backed by
  another backend for misses.
* ``remote-service``: HTTP client for the embedding microservice
  (POST /embed with {"texts": [...]}).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CacheFormatError, ContractViolation, RemoteError

TEST_EMBEDDING_DIM = 256
SERVICE_EMBEDDING_DIM = 768

BACKEND_KINDS = ("deterministic-test", "exact-match", "file-cache", "remote-service")

_FNV_OFFSET = 14695981039346656037
_FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1


@dataclass
class EmbeddingBackendConfig:
    """Selects and parameterizes an embedding backend.

    ``remote-service`` requires ``endpoint``; ``file-cache`` requires
    ``cache_path`` (and uses ``endpoint`` for cache misses when given,
    otherwise misses fall back to the deterministic test embedder only if
    ``cache_fallback`` is enabled).
    """

    kind: str = "deterministic-test"
    endpoint: str | None = None
    cache_path: str | Path | None = None
    max_in_flight: int = 8
    max_batch: int = 64
    cache_fallback: bool = False

    def __post_init__(self):
        if self.kind not in BACKEND_KINDS:
            raise ContractViolation(
                f"unknown backend kind {self.kind!r}; expected one of {BACKEND_KINDS}"
            )
        if self.kind == "remote-service" and not self.endpoint:
            raise ContractViolation("remote-service backend requires an endpoint URL")
        if self.kind == "file-cache" and not self.cache_path:
            raise ContractViolation("file-cache backend requires cache_path")


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


class DeterministicEmbedder:
    """Trigram hashing embedder, 256 dimensions, unit L2 norm.

    Recipe: lowercase the text, pad with one '#' on each side, take all
    character trigrams, hash each with FNV-1a 64-bit over its UTF-8 bytes,
    bucket = hash mod 256, sign = +1 if bit 32 of the hash is clear else -1,
    accumulate, then L2-normalize. No trigrams (the empty string) produces
    the all-zero vector.
    """

    dim = TEST_EMBEDDING_DIM

    def __init__(self):
        self._memo: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def embed(self, text: str) -> np.ndarray:
        with self._lock:
            hit = self._memo.get(text)
        if hit is not None:
            return hit
        padded = "#" + text.lower() + "#"
        acc = np.zeros(self.dim)
        for i in range(len(padded) - 2):
            h = fnv1a_64(padded[i : i + 3].encode("utf-8"))
            sign = 1.0 if (h >> 32) & 1 == 0 else -1.0
            acc[h % self.dim] += sign
        norm = float(np.linalg.norm(acc))
        if norm > 0.0:
            acc /= norm
        acc.setflags(write=False)
        with self._lock:
            self._memo[text] = acc
        return acc

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        return _batch_via_embed(self, texts)


class ExactMatchBackend:
    """Similarity stub for analytic fixtures: 1 if the trimmed strings are
    equal, else 0. Bypasses vectors entirely; ``embed`` is unsupported."""

    def similarity(self, a: str, b: str) -> float:
        return 1.0 if a.strip() == b.strip() else 0.0

    def embed(self, text: str) -> np.ndarray:
        raise ContractViolation("exact-match backend does not produce vectors")

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        raise ContractViolation("exact-match backend does not produce vectors")


class FileCacheBackend:
    """JSON Lines embedding cache, one {"text", "vector"} object per line.

    Keys are the exact string bytes, no normalization. Reads are lock-free
    against the in-memory table; writes (cache misses) are serialized. A
    miss with no inner backend is a contract violation, pointing the caller
    at warming the cache first.
    """

    def __init__(self, cache_path: str | Path, inner=None):
        self.path = Path(cache_path)
        self.inner = inner
        self._write_lock = threading.Lock()
        self._table: dict[str, np.ndarray] = {}
        if self.path.exists():
            self._load()

    def _load(self):
        with open(self.path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    text = record["text"]
                    vector = np.asarray(record["vector"], dtype=float)
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise CacheFormatError(self.path, lineno, f"bad cache record ({exc})") from exc
                if not isinstance(text, str) or vector.ndim != 1:
                    raise CacheFormatError(self.path, lineno, "bad cache record (wrong field types)")
                vector.setflags(write=False)
                self._table[text] = vector

    def __len__(self) -> int:
        return len(self._table)

    def embed(self, text: str) -> np.ndarray:
        hit = self._table.get(text)
        if hit is not None:
            return hit
        if self.inner is None:
            raise ContractViolation(
                f"text not in embedding cache {self.path} and no inner backend configured: {text!r}"
            )
        vector = self.inner.embed(text)
        with self._write_lock:
            # re-check under the lock; another thread may have filled it
            hit = self._table.get(text)
            if hit is not None:
                return hit
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"text": text, "vector": [float(x) for x in vector]}) + "\n")
            stored = np.asarray(vector, dtype=float)
            stored.setflags(write=False)
            self._table[text] = stored
        return stored

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        return _batch_via_embed(self, texts)


class RemoteEmbedder:
    """Client for the embedding service (POST {endpoint} with {"texts": [...]}).

    Responses are memoized per instance, which also guarantees bitwise
    determinism across repeated calls. In-flight requests are bounded by a
    semaphore so shared use from many workers cannot stampede the service.
    """

    def __init__(self, endpoint: str, *, max_in_flight: int = 8, max_batch: int = 64,
                 timeout: float = 30.0, transport=None):
        import httpx

        self.endpoint = endpoint
        self.max_batch = max_batch
        self._client = httpx.Client(timeout=timeout, transport=transport)
        self._semaphore = threading.Semaphore(max_in_flight)
        self._memo: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def _post(self, texts: list[str]) -> list[np.ndarray]:
        import httpx

        try:
            with self._semaphore:
                response = self._client.post(self.endpoint, json={"texts": texts})
        except httpx.TransportError as exc:
            raise RemoteError(f"embedding service unreachable: {exc}", retriable=True) from exc
        if response.status_code in (429,) or response.status_code >= 500:
            raise RemoteError(
                f"embedding service returned {response.status_code}", retriable=True
            )
        if response.status_code != 200:
            raise RemoteError(
                f"embedding service returned {response.status_code}", retriable=False
            )
        try:
            vectors = response.json()["vectors"]
        except (KeyError, ValueError) as exc:
            raise RemoteError(f"malformed embedding response: {exc}", retriable=False) from exc
        if len(vectors) != len(texts):
            raise RemoteError(
                f"embedding service returned {len(vectors)} vectors for {len(texts)} texts",
                retriable=False,
            )
        out = []
        for vec in vectors:
            arr = np.asarray(vec, dtype=float)
            arr.setflags(write=False)
            out.append(arr)
        return out

    def embed(self, text: str) -> np.ndarray:
        with self._lock:
            hit = self._memo.get(text)
        if hit is not None:
            return hit
        vector = self._post([text])[0]
        with self._lock:
            self._memo.setdefault(text, vector)
            return self._memo[text]

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        results: list[np.ndarray | None] = [None] * len(texts)
        missing: list[int] = []
        with self._lock:
            for i, text in enumerate(texts):
                hit = self._memo.get(text)
                if hit is None:
                    missing.append(i)
                else:
                    results[i] = hit
        for start in range(0, len(missing), self.max_batch):
            chunk = missing[start : start + self.max_batch]
            try:
                vectors = self._post([texts[i] for i in chunk])
            except RemoteError as exc:
                raise RemoteError(
                    f"embed_batch failed at text index {chunk[0]}: {exc}",
                    retriable=exc.retriable,
                ) from exc
            with self._lock:
                for i, vec in zip(chunk, vectors):
                    self._memo.setdefault(texts[i], vec)
                    results[i] = self._memo[texts[i]]
        return results  # type: ignore[return-value]

    def close(self):
        self._client.close()


def _batch_via_embed(backend, texts: Sequence[str]) -> list[np.ndarray]:
    out = []
    for i, text in enumerate(texts):
        try:
            out.append(backend.embed(text))
        except (ContractViolation, RemoteError) as exc:
            raise type(exc)(f"embed_batch failed at text index {i}: {exc}", **_error_kwargs(exc))
    return out


def _error_kwargs(exc) -> dict:
    return {"retriable": exc.retriable} if isinstance(exc, RemoteError) else {}


def make_backend(config: EmbeddingBackendConfig):
    """Build the backend selected by ``config``."""
    if config.kind == "deterministic-test":
        return DeterministicEmbedder()
    if config.kind == "exact-match":
        return ExactMatchBackend()
    if config.kind == "remote-service":
        return RemoteEmbedder(
            config.endpoint,
            max_in_flight=config.max_in_flight,
            max_batch=config.max_batch,
        )
    # file-cache
    inner = None
    if config.endpoint:
        inner = RemoteEmbedder(
            config.endpoint, max_in_flight=config.max_in_flight, max_batch=config.max_batch
        )
    elif config.cache_fallback:
        inner = DeterministicEmbedder()
    return FileCacheBackend(config.cache_path, inner=inner)


def embed_batch(backend, texts: Iterable[str]) -> list[np.ndarray]:
    """Order-preserving batch embedding, element-wise identical to ``embed``."""
    return backend.embed_batch(list(texts))
