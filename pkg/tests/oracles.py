"""Independent reference implementations used as test oracles.

These are written separately from the library code on purpose: the splitter
oracle re-derives chunk spans with string splitting and explicit index
bookkeeping, and the search oracle scores every entry row by row and
full-sorts.  Tests compare library output against these, never the other way
around.
"""

from __future__ import annotations

import numpy as np


def reference_split_spans(
    text: str, chunk_size: int, overlap: int, separators: tuple[str, ...]
) -> list[tuple[int, int]]:
    """Reference chunker returning (start, end) spans over ``text``."""
    if not text:
        return []

    def atomize(base: int, segment: str, seps: list[str]) -> list[tuple[int, int]]:
        if len(segment) <= chunk_size:
            return [(base, base + len(segment))] if segment else []
        sep = seps[0]
        if sep == "":
            return [(base + k, base + k + 1) for k in range(len(segment))]
        atoms: list[tuple[int, int]] = []
        offset = base
        for part in segment.split(sep):
            if part:
                if len(part) > chunk_size:
                    atoms.extend(atomize(offset, part, seps[1:]))
                else:
                    atoms.append((offset, offset + len(part)))
            offset += len(part) + len(sep)
        return atoms

    atoms = atomize(0, text, list(separators))
    if not atoms:
        return []
    spans: list[tuple[int, int]] = []
    window = [atoms[0]]
    for atom in atoms[1:]:
        if atom[1] - window[0][0] <= chunk_size:
            window.append(atom)
            continue
        spans.append((window[0][0], window[-1][1]))
        j = 0
        while j < len(window):
            tail_start = window[j][0]
            if (
                window[-1][1] - tail_start <= overlap
                and atom[1] - tail_start <= chunk_size
            ):
                break
            j += 1
        window = window[j:]
        window.append(atom)
    spans.append((window[0][0], window[-1][1]))
    return spans


def sliding_window_spans(length: int, chunk_size: int, overlap: int) -> list[tuple[int, int]]:
    """Expected spans for separator-free text: plain stride arithmetic."""
    if length == 0:
        return []
    if length <= chunk_size:
        return [(0, length)]
    step = chunk_size - overlap
    spans = []
    start = 0
    while True:
        end = start + chunk_size
        if end >= length:
            spans.append((start, length))
            break
        spans.append((start, end))
        start += step
    return spans


def brute_force_top_k(
    ids: list[int], rows: np.ndarray, query: np.ndarray, k: int
) -> list[tuple[int, float]]:
    """Score every entry, full-sort by (-score, id), take k."""
    q = np.asarray(query, dtype=np.float64)
    qn = float(np.linalg.norm(q))
    scored: list[tuple[int, float]] = []
    for cid, row in zip(ids, np.asarray(rows, dtype=np.float32)):
        r = row.astype(np.float64)
        rn = float(np.linalg.norm(r))
        score = 0.0 if rn == 0.0 or qn == 0.0 else float(np.dot(r, q) / (rn * qn))
        scored.append((cid, score))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:k]
