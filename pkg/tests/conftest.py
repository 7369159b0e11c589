"""Shared fixtures: stub compiler config, demo suite paths, desk-scale corpus."""

from __future__ import annotations

import random
import shlex
import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
BENCHSUITE = REPO_ROOT / "benchsuite"
CASES_DIR = BENCHSUITE / "cases"
CORPUS_DIR = BENCHSUITE / "corpus"
SCRIPTS_DIR = BENCHSUITE / "scripts"
DATA_DIR = Path(__file__).resolve().parent / "data"

STUB_COMPILER = f"{shlex.quote(sys.executable)} -m ragrepair.stub_javac"

# Desk-scale corpus: 182 docs x 8 equal paragraphs -> exactly 1456 chunks with
# the default 300/50 window.
DESK_DOC_COUNT = 182
DESK_PARAGRAPHS = 8
DESK_PARA_LEN = 260
DESK_CHUNKS = DESK_DOC_COUNT * DESK_PARAGRAPHS


@pytest.fixture(scope="session")
def stub_compiler_config():
    from ragrepair.java_compiler import CompilerConfig

    return CompilerConfig(compiler_path=STUB_COMPILER, timeout=120.0)


def _paragraph(rng: random.Random, length: int) -> str:
    words = []
    total = 0
    while total < length + 20:
        word = "".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(rng.randint(3, 9)))
        words.append(word)
        total += len(word) + 1
    text = " ".join(words)[:length]
    return text.rstrip() + "x" * (length - len(text.rstrip()))


@pytest.fixture(scope="session")
def desk_corpus_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("desk_corpus")
    rng = random.Random(20240901)
    for i in range(DESK_DOC_COUNT):
        paragraphs = [_paragraph(rng, DESK_PARA_LEN) for _ in range(DESK_PARAGRAPHS)]
        (root / f"doc_{i:03d}.txt").write_text("\n\n".join(paragraphs), encoding="utf-8")
    return root


@pytest.fixture(scope="session")
def desk_index_path(tmp_path_factory, desk_corpus_dir) -> Path:
    from ragrepair.corpus import ChunkingConfig, ingest_corpus
    from ragrepair.embedding import EmbeddingProviderConfig, embed_batch
    from ragrepair.vector_index import VectorIndex

    chunks, _ = ingest_corpus(desk_corpus_dir, ChunkingConfig())
    provider = EmbeddingProviderConfig()
    vectors = embed_batch([c.text for c in chunks], provider)
    index = VectorIndex(provider.dim)
    index.add_chunks(chunks, vectors)
    path = tmp_path_factory.mktemp("desk_index") / "desk.rvix"
    index.save(path)
    return path


@pytest.fixture(scope="session")
def demo_index_path(tmp_path_factory) -> Path:
    """Index over the shipped documentation corpus (offline embeddings)."""
    from ragrepair.corpus import ChunkingConfig, ingest_corpus
    from ragrepair.embedding import EmbeddingProviderConfig, embed_batch
    from ragrepair.vector_index import VectorIndex

    chunks, _ = ingest_corpus(CORPUS_DIR, ChunkingConfig())
    provider = EmbeddingProviderConfig()
    vectors = embed_batch([c.text for c in chunks], provider)
    index = VectorIndex(provider.dim)
    index.add_chunks(chunks, vectors)
    path = tmp_path_factory.mktemp("demo_index") / "demo.rvix"
    index.save(path)
    return path


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" in nodeid and "::" in nodeid:
                rows.append((nodeid.split("::")[-1], outcome == "passed"))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in sorted(rows):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")
