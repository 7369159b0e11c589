"""Persistent flat vector store with exact cosine top-k search.

The store keeps every vector in insertion order and scores queries against all
of them: at the corpus scales this package targets (a few thousand chunks),
exact search is faster to verify and fast enough to run.  Scores are computed
from float32 storage with float64 accumulation; ties break by ascending
chunk id.

On-disk layout (little-endian):

    payload file   magic "RVIX" | format version u32 | dim u32 | count u64 |
                   count x dim float32 values in insertion order
    sidecar json   {"entries": [{chunk_id, doc_id, start_offset, text}, ...],
                    "payload_sha256": hex}
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Chunk
from .errors import ContractError, CorruptIndexError, IndexFormatError, InputError

MAGIC = b"RVIX"
FORMAT_VERSION = 1
DEFAULT_TOP_K = 4

_HEADER = struct.Struct("<IIQ")


@dataclass(frozen=True)
class SearchHit:
    chunk_id: int
    score: float
    text: str
    doc_id: str


def sidecar_path(payload_path: str | Path) -> Path:
    return Path(str(payload_path) + ".meta.json")


class VectorIndex:
    """Flat in-memory index over (chunk_id, vector) entries plus chunk metadata."""

    def __init__(self, dim: int):
        if dim <= 0:
            raise ContractError(f"index dim must be positive, got {dim}")
        self.dim = dim
        self._ids: list[int] = []
        self._rows: list[np.ndarray] = []
        self._meta: dict[int, dict] = {}
        self._matrix: np.ndarray | None = None
        self._norms: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def size(self) -> int:
        return len(self._ids)

    def metadata(self, chunk_id: int) -> dict:
        return self._meta[chunk_id]

    def add_chunks(self, chunks: list[Chunk], vectors: list[np.ndarray]) -> "VectorIndex":
        """Append chunk/vector pairs; existing entries are untouched."""
        if len(chunks) != len(vectors):
            raise ContractError(
                f"got {len(chunks)} chunks but {len(vectors)} vectors"
            )
        seen = set(self._ids)
        staged_ids: list[int] = []
        staged_rows: list[np.ndarray] = []
        for chunk, vec in zip(chunks, vectors):
            arr = np.asarray(vec, dtype=np.float32)
            if arr.ndim != 1 or arr.shape[0] != self.dim:
                raise ContractError(
                    f"vector for chunk {chunk.chunk_id} has shape {arr.shape}, expected ({self.dim},)"
                )
            if chunk.chunk_id in seen:
                raise ContractError(f"duplicate chunk_id {chunk.chunk_id}")
            seen.add(chunk.chunk_id)
            staged_ids.append(chunk.chunk_id)
            staged_rows.append(arr)
        for chunk, cid, row in zip(chunks, staged_ids, staged_rows):
            self._ids.append(cid)
            self._rows.append(row)
            self._meta[cid] = {
                "doc_id": chunk.doc_id,
                "start_offset": chunk.start_offset,
                "text": chunk.text,
            }
        self._matrix = None
        self._norms = None
        return self

    def _ensure_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        if self._matrix is None:
            if self._rows:
                self._matrix = np.vstack(self._rows).astype(np.float32)
            else:
                self._matrix = np.zeros((0, self.dim), dtype=np.float32)
            self._norms = np.linalg.norm(self._matrix.astype(np.float64), axis=1)
        return self._matrix, self._norms

    def search(self, query: np.ndarray, k: int = DEFAULT_TOP_K) -> list[SearchHit]:
        """Exact top-k by cosine similarity; ties break by ascending chunk id."""
        if k < 1:
            raise ContractError(f"k must be >= 1, got {k}")
        q = np.asarray(query, dtype=np.float32)
        if q.ndim != 1 or q.shape[0] != self.dim:
            raise ContractError(f"query has shape {q.shape}, expected ({self.dim},)")
        if not self._ids:
            return []
        qnorm = float(np.linalg.norm(q.astype(np.float64)))
        if qnorm == 0.0:
            raise InputError("cannot search with a zero query vector")
        matrix, norms = self._ensure_matrix()
        # einsum, not matmul: BLAS gemv rounds identical rows differently at
        # some shapes, which would break exact tie reproduction.
        dots = np.einsum("ij,j->i", matrix.astype(np.float64), q.astype(np.float64))
        denom = np.where(norms == 0.0, 1.0, norms) * qnorm
        scores = np.where(norms == 0.0, 0.0, dots / denom)
        ids = np.asarray(self._ids, dtype=np.int64)
        order = np.lexsort((ids, -scores))
        hits = []
        for pos in order[: min(k, len(self._ids))]:
            cid = int(ids[pos])
            meta = self._meta[cid]
            hits.append(
                SearchHit(
                    chunk_id=cid,
                    score=float(scores[pos]),
                    text=meta["text"],
                    doc_id=meta["doc_id"],
                )
            )
        return hits

    def save(self, path: str | Path) -> None:
        """Write the payload file at ``path`` and its JSON sidecar next to it."""
        payload_path = Path(path)
        payload_path.parent.mkdir(parents=True, exist_ok=True)
        matrix, _ = self._ensure_matrix()
        payload = MAGIC + _HEADER.pack(FORMAT_VERSION, self.dim, len(self._ids))
        payload += matrix.astype("<f4").tobytes(order="C")
        payload_path.write_bytes(payload)
        entries = [
            {
                "chunk_id": cid,
                "doc_id": self._meta[cid]["doc_id"],
                "start_offset": self._meta[cid]["start_offset"],
                "text": self._meta[cid]["text"],
            }
            for cid in self._ids
        ]
        sidecar = {
            "entries": entries,
            "payload_sha256": hashlib.sha256(payload).hexdigest(),
        }
        sidecar_path(payload_path).write_text(
            json.dumps(sidecar, sort_keys=True, indent=1), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        """Load a saved index, verifying magic, version, sizes, and payload hash."""
        payload_path = Path(path)
        payload = payload_path.read_bytes()
        if payload[:4] != MAGIC:
            raise IndexFormatError(f"{payload_path}: bad magic {payload[:4]!r}")
        if len(payload) < 4 + _HEADER.size:
            raise CorruptIndexError(f"{payload_path}: truncated header")
        version, dim, count = _HEADER.unpack_from(payload, 4)
        if version != FORMAT_VERSION:
            raise IndexFormatError(
                f"{payload_path}: unsupported format version {version}"
            )
        body = payload[4 + _HEADER.size :]
        expected = count * dim * 4
        if len(body) != expected:
            raise CorruptIndexError(
                f"{payload_path}: payload holds {len(body)} bytes, expected {expected}"
            )
        meta_path = sidecar_path(payload_path)
        try:
            sidecar = json.loads(meta_path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise CorruptIndexError(f"missing sidecar file {meta_path}") from None
        except json.JSONDecodeError as exc:
            raise CorruptIndexError(f"{meta_path}: invalid JSON: {exc}") from exc
        recorded = sidecar.get("payload_sha256", "")
        actual = hashlib.sha256(payload).hexdigest()
        if recorded != actual:
            raise CorruptIndexError(f"{payload_path}: payload hash mismatch")
        entries = sidecar.get("entries", [])
        if len(entries) != count:
            raise CorruptIndexError(
                f"{meta_path}: {len(entries)} metadata entries for {count} vectors"
            )
        if dim == 0:
            raise CorruptIndexError(f"{payload_path}: zero dim")
        index = cls(dim)
        rows = np.frombuffer(body, dtype="<f4").reshape(count, dim).copy()
        for i, entry in enumerate(entries):
            try:
                cid = int(entry["chunk_id"])
                index._ids.append(cid)
                index._rows.append(rows[i])
                index._meta[cid] = {
                    "doc_id": entry["doc_id"],
                    "start_offset": entry["start_offset"],
                    "text": entry["text"],
                }
            except (KeyError, TypeError, ValueError) as exc:
                raise CorruptIndexError(f"{meta_path}: malformed entry {i}: {exc}") from exc
        if len(set(index._ids)) != len(index._ids):
            raise CorruptIndexError(f"{meta_path}: duplicate chunk ids")
        return index


def payload_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
