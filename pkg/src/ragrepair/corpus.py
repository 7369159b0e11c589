"""Documentation corpus loading and overlapping character-window chunking.

Splitting works coarse-to-fine: a span that fits the window is kept whole,
otherwise it is divided at the current separator and oversized parts recurse
with the next one (the final empty-string separator divides per character).
Adjacent parts are then merged greedily up to ``chunk_size``, carrying at most
``overlap`` trailing characters into the next chunk.  Every chunk is a verbatim
substring of its document, addressed by character offset.
"""

from __future__ import annotations

import hashlib
import html
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, CorpusError

DEFAULT_SEPARATORS = ("\n\n", "\n", " ", "")

ORIGINS = ("official_docs", "tutorial", "community")

_ORIGIN_ALIASES = {
    "official_docs": "official_docs",
    "official": "official_docs",
    "docs": "official_docs",
    "tutorial": "tutorial",
    "tutorials": "tutorial",
    "community": "community",
    "forum": "community",
    "forums": "community",
}

TEXT_SUFFIXES = {".txt", ".md", ".markdown", ".html", ".htm"}


@dataclass(frozen=True)
class ChunkingConfig:
    """Window parameters for the character splitter."""

    chunk_size: int = 300
    overlap: int = 50
    separators: tuple[str, ...] = DEFAULT_SEPARATORS

    def __post_init__(self):
        if self.chunk_size <= 0:
            raise ConfigError(f"chunk_size must be positive, got {self.chunk_size}")
        if not 0 <= self.overlap < self.chunk_size:
            raise ConfigError(
                f"overlap must satisfy 0 <= overlap < chunk_size, got {self.overlap}"
            )
        if not self.separators or self.separators[-1] != "":
            raise ConfigError(
                "separators must be non-empty and end with the per-character fallback ''"
            )


@dataclass(frozen=True)
class SourceDocument:
    """One corpus file, already decoded (and tag-stripped for HTML)."""

    doc_id: str
    text: str
    origin: str = "community"


@dataclass(frozen=True)
class Chunk:
    """A contiguous slice of a document; the retrieval unit."""

    chunk_id: int
    doc_id: str
    start_offset: int
    text: str

    @property
    def length(self) -> int:
        return len(self.text)


@dataclass
class ManifestEntry:
    doc_id: str
    origin: str
    chunk_count: int
    sha256: str


@dataclass
class CorpusManifest:
    """Per-document accounting emitted next to the built index."""

    documents: list[ManifestEntry] = field(default_factory=list)
    total_chunks: int = 0
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "documents": [vars(e) for e in self.documents],
            "total_chunks": self.total_chunks,
            "warnings": list(self.warnings),
        }


def split_text(
    text: str,
    config: ChunkingConfig,
    *,
    doc_id: str = "",
    first_chunk_id: int = 0,
) -> list[Chunk]:
    """Split ``text`` into overlapping chunks of at most ``chunk_size`` characters.

    Returns an empty list for empty text.  Chunk offsets are strictly
    increasing and each chunk's text equals ``text[start : start + len]``.
    """
    if not text:
        return []
    atoms = _split_spans(text, 0, len(text), config, 0)
    spans = _merge_spans(atoms, config)
    return [
        Chunk(chunk_id=first_chunk_id + i, doc_id=doc_id, start_offset=s, text=text[s:e])
        for i, (s, e) in enumerate(spans)
    ]


def _split_spans(
    text: str, lo: int, hi: int, config: ChunkingConfig, level: int
) -> list[tuple[int, int]]:
    """Divide [lo, hi) into separator-free spans no longer than chunk_size."""
    if hi <= lo:
        return []
    if hi - lo <= config.chunk_size:
        return [(lo, hi)]
    sep = config.separators[level]
    if sep == "":
        return [(i, i + 1) for i in range(lo, hi)]
    pieces: list[tuple[int, int]] = []
    pos = lo
    while pos < hi:
        nxt = text.find(sep, pos, hi)
        if nxt == -1:
            pieces.append((pos, hi))
            break
        if nxt > pos:
            pieces.append((pos, nxt))
        pos = nxt + len(sep)
    out: list[tuple[int, int]] = []
    for s, e in pieces:
        if e - s > config.chunk_size:
            out.extend(_split_spans(text, s, e, config, level + 1))
        else:
            out.append((s, e))
    return out


def _merge_spans(
    atoms: list[tuple[int, int]], config: ChunkingConfig
) -> list[tuple[int, int]]:
    """Greedily pack atoms into windows, retaining up to ``overlap`` trailing chars."""
    if not atoms:
        return []
    chunks: list[tuple[int, int]] = []
    held: list[tuple[int, int]] = [atoms[0]]
    for atom in atoms[1:]:
        if atom[1] - held[0][0] <= config.chunk_size:
            held.append(atom)
            continue
        chunks.append((held[0][0], held[-1][1]))
        while held and (
            held[-1][1] - held[0][0] > config.overlap
            or atom[1] - held[0][0] > config.chunk_size
        ):
            held.pop(0)
        held.append(atom)
    chunks.append((held[0][0], held[-1][1]))
    return chunks


_SCRIPT_STYLE_RE = re.compile(r"<(script|style)\b.*?</\1\s*>", re.IGNORECASE | re.DOTALL)
_COMMENT_RE = re.compile(r"<!--.*?-->", re.DOTALL)
_BLOCK_TAG_RE = re.compile(
    r"</?(?:p|br|div|li|ul|ol|tr|td|th|table|h[1-6]|blockquote|pre|section|article)\b[^>]*>",
    re.IGNORECASE,
)
_ANY_TAG_RE = re.compile(r"<[^>]+>")


def strip_html(markup: str) -> str:
    """Reduce an HTML page to plain prose via simple tag removal (no DOM)."""
    text = _SCRIPT_STYLE_RE.sub(" ", markup)
    text = _COMMENT_RE.sub(" ", text)
    text = _BLOCK_TAG_RE.sub("\n", text)
    text = _ANY_TAG_RE.sub(" ", text)
    text = html.unescape(text)
    lines = [re.sub(r"[ \t]+", " ", ln).strip() for ln in text.splitlines()]
    text = "\n".join(lines)
    text = re.sub(r"\n{3,}", "\n\n", text)
    return text.strip()


def _origin_for(rel_path: Path) -> str:
    head = rel_path.parts[0].lower() if len(rel_path.parts) > 1 else ""
    return _ORIGIN_ALIASES.get(head, "community")


def load_documents(root_dir: str | Path) -> tuple[list[SourceDocument], list[str]]:
    """Discover corpus files under ``root_dir`` in lexicographic path order."""
    root = Path(root_dir)
    if not root.is_dir():
        raise CorpusError(f"corpus directory not found: {root}")
    paths = sorted(
        (p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in TEXT_SUFFIXES),
        key=lambda p: p.relative_to(root).as_posix(),
    )
    documents: list[SourceDocument] = []
    warnings: list[str] = []
    for path in paths:
        rel = path.relative_to(root)
        try:
            raw = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            warnings.append(f"skipped {rel.as_posix()}: {exc}")
            continue
        text = strip_html(raw) if path.suffix.lower() in {".html", ".htm"} else raw
        if not text.strip():
            warnings.append(f"skipped {rel.as_posix()}: empty after processing")
            continue
        documents.append(
            SourceDocument(doc_id=rel.as_posix(), text=text, origin=_origin_for(rel))
        )
    return documents, warnings


def ingest_corpus(
    root_dir: str | Path, config: ChunkingConfig
) -> tuple[list[Chunk], CorpusManifest]:
    """Load every corpus file and chunk it, assigning dense global chunk ids."""
    documents, warnings = load_documents(root_dir)
    if not documents:
        raise CorpusError("empty corpus")
    chunks: list[Chunk] = []
    manifest = CorpusManifest(warnings=warnings)
    for doc in documents:
        doc_chunks = split_text(
            doc.text, config, doc_id=doc.doc_id, first_chunk_id=len(chunks)
        )
        chunks.extend(doc_chunks)
        manifest.documents.append(
            ManifestEntry(
                doc_id=doc.doc_id,
                origin=doc.origin,
                chunk_count=len(doc_chunks),
                sha256=hashlib.sha256(doc.text.encode("utf-8")).hexdigest(),
            )
        )
    manifest.total_chunks = len(chunks)
    return chunks, manifest
