"""Prompt construction, retrieval-query building, and reply code extraction.

Templates are fixed, versioned strings with ``{{code}}``, ``{{error}}``,
``{{context}}``, and ``{{previous_fix}}`` placeholders; a templates directory
can override any of them per run.  All builders are pure: identical inputs
produce byte-identical bundles.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import InputError
from .java_compiler import Diagnostic
from .vector_index import SearchHit

VARIANT_BASELINE = "baseline"
VARIANT_RAILS = "rails"
VARIANT_REFINEMENT = "refinement"

DEFAULT_TOKEN_BUDGET = 12000

EMPTY_CONTEXT_MARKER = "(no relevant documentation found)"

DEFAULT_SYSTEM_TEXT = (
    "You are a Java repair assistant. Fix the compilation errors while "
    "preserving the program's intent, and reply with the complete corrected "
    "file only."
)

_CODE_SECTION = "### Broken code\n{{code}}"
_ERROR_SECTION = "### Compiler error\n{{error}}"
_CONTEXT_SECTION = "### Documentation context\n{{context}}"
_PREVIOUS_SECTION = "### Previous attempted fix\n{{previous_fix}}"
_INSTRUCTION = "Return the complete corrected Java file and nothing else."
_INTRO = "The following Java file does not compile."

BASELINE_TEMPLATE = "\n\n".join([_INTRO, _CODE_SECTION, _ERROR_SECTION, _INSTRUCTION])
RAILS_TEMPLATE = "\n\n".join(
    [_INTRO, _CODE_SECTION, _ERROR_SECTION, _CONTEXT_SECTION, _INSTRUCTION]
)
REFINEMENT_TEMPLATE = "\n\n".join(
    [
        _INTRO,
        _CODE_SECTION,
        _PREVIOUS_SECTION,
        "### Compiler error after the attempt\n{{error}}",
        _CONTEXT_SECTION,
        _INSTRUCTION,
    ]
)


@dataclass(frozen=True)
class PromptTemplates:
    system: str = DEFAULT_SYSTEM_TEXT
    baseline: str = BASELINE_TEMPLATE
    rails: str = RAILS_TEMPLATE
    refinement: str = REFINEMENT_TEMPLATE


DEFAULT_TEMPLATES = PromptTemplates()

_TEMPLATE_FILES = {
    "system": "system.txt",
    "baseline": "baseline.txt",
    "rails": "rails.txt",
    "refinement": "refinement.txt",
}


def load_templates(directory: str | Path) -> PromptTemplates:
    """Load template overrides from a directory; absent files keep the default."""
    root = Path(directory)
    values: dict[str, str] = {}
    for slot, filename in _TEMPLATE_FILES.items():
        path = root / filename
        if path.is_file():
            values[slot] = path.read_text(encoding="utf-8")
    return PromptTemplates(**values)


@dataclass(frozen=True)
class PromptBundle:
    """One rendered prompt plus enough metadata to replay and audit it."""

    system_text: str
    user_text: str
    variant: str
    included_chunk_ids: tuple[int, ...]
    token_estimate: int
    source: str


def estimate_tokens(*parts: str) -> int:
    """Rough token count: one token per four characters."""
    chars = sum(len(p) for p in parts)
    return (chars + 3) // 4


def _fill(template: str, **values: str) -> str:
    out = template
    for key, val in values.items():
        out = out.replace("{{" + key + "}}", val)
    return out


def render_context(hits: list[SearchHit] | tuple[SearchHit, ...]) -> str:
    """Format retrieved chunks as labeled blocks, highest score first."""
    if not hits:
        return EMPTY_CONTEXT_MARKER
    blocks = [
        f"[{i}] {hit.doc_id} (score={hit.score:.4f})\n{hit.text}"
        for i, hit in enumerate(hits, start=1)
    ]
    return "\n\n".join(blocks)


def build_retrieval_query(source: str, diagnostics: list[Diagnostic]) -> str:
    """Build the retrieval query from unresolved symbols, missing packages,
    the first error message, and the source line at each error location."""
    symbols: list[str] = []
    packages: list[str] = []
    error_lines: list[str] = []
    source_lines = source.splitlines()
    first_message = ""
    for diag in diagnostics:
        if not first_message and diag.severity == "error":
            first_message = diag.message
        if diag.symbol and diag.symbol not in symbols:
            symbols.append(diag.symbol)
        if diag.package and diag.package not in packages:
            packages.append(diag.package)
        if 1 <= diag.line <= len(source_lines):
            text = source_lines[diag.line - 1].strip()
            if text and text not in error_lines:
                error_lines.append(text)
    parts = symbols + packages
    if first_message:
        parts.append(first_message)
    parts.extend(error_lines)
    return "\n".join(parts)


def build_baseline_prompt(
    source: str, error_text: str, templates: PromptTemplates = DEFAULT_TEMPLATES
) -> PromptBundle:
    """Prompt with only the broken code and compiler error; no retrieved context."""
    if not error_text:
        raise InputError("baseline prompt requires a non-empty error text")
    user_text = _fill(templates.baseline, code=source, error=error_text)
    return PromptBundle(
        system_text=templates.system,
        user_text=user_text,
        variant=VARIANT_BASELINE,
        included_chunk_ids=(),
        token_estimate=estimate_tokens(templates.system, user_text),
        source=source,
    )


def _budgeted_context(
    template: str,
    hits: list[SearchHit] | tuple[SearchHit, ...],
    token_budget: int,
    system_text: str,
    **values: str,
) -> tuple[str, tuple[int, ...], int]:
    """Render with as many whole chunks as fit the budget, dropping lowest-score
    chunks first but never going below one when any hit was retrieved."""
    kept = list(hits)
    while True:
        user_text = _fill(template, context=render_context(kept), **values)
        estimate = estimate_tokens(system_text, user_text)
        if estimate <= token_budget or len(kept) <= 1:
            return user_text, tuple(h.chunk_id for h in kept), estimate
        kept.pop()  # hits arrive sorted by score descending


def build_rails_prompt(
    source: str,
    error_text: str,
    hits: list[SearchHit] | tuple[SearchHit, ...],
    templates: PromptTemplates = DEFAULT_TEMPLATES,
    token_budget: int = DEFAULT_TOKEN_BUDGET,
) -> PromptBundle:
    """Prompt carrying code, error, retrieved documentation, and the instruction."""
    user_text, chunk_ids, estimate = _budgeted_context(
        templates.rails,
        hits,
        token_budget,
        templates.system,
        code=source,
        error=error_text,
    )
    return PromptBundle(
        system_text=templates.system,
        user_text=user_text,
        variant=VARIANT_RAILS,
        included_chunk_ids=chunk_ids,
        token_estimate=estimate,
        source=source,
    )


def build_refinement_prompt(
    previous: PromptBundle,
    previous_fix: str,
    new_error: str,
    hits: list[SearchHit] | tuple[SearchHit, ...],
    templates: PromptTemplates = DEFAULT_TEMPLATES,
    token_budget: int = DEFAULT_TOKEN_BUDGET,
) -> PromptBundle:
    """Follow-up prompt adding the previous attempt and the fresh compiler error.

    Retrieval hits for the new error replace the previous turn's context.
    """
    if not previous_fix:
        raise InputError("refinement prompt requires the previous attempted fix")
    user_text, chunk_ids, estimate = _budgeted_context(
        templates.refinement,
        hits,
        token_budget,
        templates.system,
        code=previous.source,
        previous_fix=previous_fix,
        error=new_error,
    )
    return PromptBundle(
        system_text=templates.system,
        user_text=user_text,
        variant=VARIANT_REFINEMENT,
        included_chunk_ids=chunk_ids,
        token_estimate=estimate,
        source=previous.source,
    )


_FENCE_RE = re.compile(r"```[A-Za-z0-9_+-]*[ \t]*\r?\n(.*?)\r?\n?```", re.DOTALL)
_DECL_LINE_RE = re.compile(
    r"^\s*(?:import\s|package\s|(?:public\s+|final\s+|abstract\s+)*class\s)"
)


def extract_code(model_reply: str) -> str:
    """Pull candidate source out of a model reply.

    Order of preference: first fenced code block; else the suffix starting at
    the first import/package/class declaration line; else the whole reply
    trimmed.
    """
    if not model_reply or not model_reply.strip():
        raise InputError("model returned no content")
    match = _FENCE_RE.search(model_reply)
    if match:
        return match.group(1)
    lines = model_reply.splitlines()
    for i, line in enumerate(lines):
        if _DECL_LINE_RE.match(line):
            return "\n".join(lines[i:]).strip()
    return model_reply.strip()
