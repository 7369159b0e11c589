"""Text embedding via a pluggable provider.

Two providers: ``remote`` posts to an embeddings-style HTTP endpoint, and
``offline_hash`` maps character trigrams into signed hash buckets so the whole
pipeline can run deterministically with no network.  All vectors are
L2-normalized client-side, so cosine similarity downstream reduces to a dot
product.
"""

from __future__ import annotations

import hashlib
import logging
import os
import time
from dataclasses import dataclass

import numpy as np
import requests

from .errors import ConfigError, ContractError, InputError, TransportError

logger = logging.getLogger(__name__)

OFFLINE_DIM = 256
REMOTE_DEFAULT_DIM = 1536

# Test seam: retry backoff sleeps go through this hook.
_sleep = time.sleep

EmbeddingVector = np.ndarray


@dataclass(frozen=True)
class EmbeddingProviderConfig:
    kind: str = "offline_hash"  # "remote" | "offline_hash"
    endpoint_url: str = ""
    model_name: str = "offline-trigram-v1"
    api_key_env_var: str = ""
    dim: int = OFFLINE_DIM
    batch_size: int = 64
    timeout: float = 30.0
    max_retries: int = 3

    def __post_init__(self):
        if self.kind not in ("remote", "offline_hash"):
            raise ConfigError(f"unknown embedding provider kind: {self.kind!r}")
        if self.kind == "remote" and not (self.endpoint_url and self.api_key_env_var):
            raise ConfigError("remote embedding provider requires endpoint_url and api_key_env_var")
        if self.dim <= 0:
            raise ConfigError(f"embedding dim must be positive, got {self.dim}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")


def _offline_vector(text: str, dim: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=np.float64)
    grams = [text[i : i + 3] for i in range(len(text) - 2)] if len(text) >= 3 else [text]
    for gram in grams:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
        bucket = int.from_bytes(digest[:4], "little") % dim
        vec[bucket] += 1.0 if digest[4] & 1 else -1.0
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        # Signed buckets cancelled exactly; fall back to a fixed unit vector
        # so the result stays a pure, non-zero function of the text.
        vec[0] = 1.0
        norm = 1.0
    return (vec / norm).astype(np.float32)


def _normalize(values, dim: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != dim:
        raise ContractError(f"provider returned dim {arr.shape}, expected ({dim},)")
    if not np.all(np.isfinite(arr)):
        raise ContractError("provider returned non-finite embedding values")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ContractError("provider returned a zero embedding vector")
    return (arr / norm).astype(np.float32)


def _bearer_headers(provider: EmbeddingProviderConfig) -> dict[str, str]:
    key = os.environ.get(provider.api_key_env_var, "")
    if not key:
        raise ConfigError(
            f"environment variable {provider.api_key_env_var} is not set"
        )
    return {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}


def _post_with_retries(provider: EmbeddingProviderConfig, payload: dict) -> dict:
    last_error: Exception | None = None
    for attempt in range(provider.max_retries + 1):
        try:
            resp = requests.post(
                provider.endpoint_url,
                json=payload,
                headers=_bearer_headers(provider),
                timeout=provider.timeout,
            )
        except requests.RequestException as exc:
            last_error = exc
        else:
            if resp.status_code == 200:
                return resp.json()
            if resp.status_code in (408, 429) or resp.status_code >= 500:
                last_error = TransportError(
                    f"embedding endpoint returned {resp.status_code}"
                )
            else:
                raise TransportError(
                    f"embedding endpoint rejected request: {resp.status_code} {resp.text[:200]}"
                )
        if attempt < provider.max_retries:
            _sleep(min(0.5 * 2**attempt, 4.0))
    raise TransportError(
        f"embedding request failed after {provider.max_retries} retries: {last_error}"
    )


def _remote_batch(texts: list[str], provider: EmbeddingProviderConfig) -> list[np.ndarray]:
    payload = {"model": provider.model_name, "input": list(texts)}
    logger.debug("embedding request: model=%s inputs=%d", provider.model_name, len(texts))
    data = _post_with_retries(provider, payload)
    try:
        items = sorted(data["data"], key=lambda item: item["index"])
        raw = [item["embedding"] for item in items]
    except (KeyError, TypeError) as exc:
        raise ContractError(f"malformed embedding response: {exc}") from exc
    if len(raw) != len(texts):
        raise ContractError(
            f"embedding response holds {len(raw)} vectors for {len(texts)} inputs"
        )
    return [_normalize(values, provider.dim) for values in raw]


def embed_text(text: str, provider: EmbeddingProviderConfig) -> np.ndarray:
    """Embed one text; result has ``provider.dim`` entries and unit L2 norm."""
    if not text or not text.strip():
        raise InputError("cannot embed empty text")
    if provider.kind == "offline_hash":
        return _offline_vector(text, provider.dim)
    return _remote_batch([text], provider)[0]


def embed_batch(texts: list[str], provider: EmbeddingProviderConfig) -> list[np.ndarray]:
    """Embed many texts, preserving input order.

    Remote batches are sized by ``provider.batch_size``; a persistently failing
    slice raises a transport error naming its index range.
    """
    for i, text in enumerate(texts):
        if not text or not text.strip():
            raise InputError(f"cannot embed empty text at index {i}")
    if provider.kind == "offline_hash":
        return [_offline_vector(t, provider.dim) for t in texts]
    out: list[np.ndarray] = []
    for start in range(0, len(texts), provider.batch_size):
        stop = min(start + provider.batch_size, len(texts))
        try:
            out.extend(_remote_batch(texts[start:stop], provider))
        except TransportError as exc:
            raise TransportError(f"embedding batch [{start}:{stop}) failed: {exc}") from exc
    return out


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity, accumulated in float64."""
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    denom = float(np.linalg.norm(av)) * float(np.linalg.norm(bv))
    if denom == 0.0:
        raise InputError("cosine undefined for zero vectors")
    return float(np.dot(av, bv) / denom)
