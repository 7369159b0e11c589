"""Prompt builder, retrieval query, and code extraction tests."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ragrepair.errors import InputError
from ragrepair.java_compiler import Diagnostic
from ragrepair.prompting import (
    DEFAULT_TEMPLATES,
    EMPTY_CONTEXT_MARKER,
    PromptTemplates,
    build_baseline_prompt,
    build_rails_prompt,
    build_refinement_prompt,
    build_retrieval_query,
    extract_code,
    load_templates,
)
from ragrepair.vector_index import SearchHit

SOURCE = (
    "public class Main {\n"
    "    public static void main(String[] args) {\n"
    "        ArrayList<String> xs = new ArrayList<>();\n"
    "    }\n"
    "}\n"
)
ERROR_TEXT = "Main.java:3: error: cannot find symbol\n1 error"


def cfs(symbol, line):
    return Diagnostic("Main.java", line, "error", "cannot_find_symbol",
                      symbol, None, "cannot find symbol")


def pkg(package, line):
    return Diagnostic("Main.java", line, "error", "package_does_not_exist",
                      None, package, f"package {package} does not exist")


def hit(i, score, text="some documentation text", doc="docs/a.md"):
    return SearchHit(chunk_id=i, score=score, text=text, doc_id=doc)


# ===================================================================
# build_retrieval_query
# ===================================================================


def test_query_contains_symbol_and_source_line():
    query = build_retrieval_query(SOURCE, [cfs("ArrayList", 3)])
    assert "ArrayList" in query
    assert "ArrayList<String> xs = new ArrayList<>();" in query


def test_query_lists_symbols_in_diagnostic_order():
    query = build_retrieval_query(SOURCE, [cfs("Foo", 3), cfs("Bar", 4)])
    assert query.index("Foo") < query.index("Bar")


def test_query_includes_packages_and_first_message():
    query = build_retrieval_query(SOURCE, [pkg("com.google.gson", 1), cfs("Gson", 3)])
    assert "com.google.gson" in query
    assert "package com.google.gson does not exist" in query


def test_query_is_deterministic():
    diags = [cfs("A", 3), pkg("p.q", 1)]
    assert build_retrieval_query(SOURCE, diags) == build_retrieval_query(SOURCE, diags)


# ===================================================================
# baseline / rails prompts
# ===================================================================


def test_baseline_bundle_shape():
    bundle = build_baseline_prompt(SOURCE, ERROR_TEXT)
    assert bundle.variant == "baseline"
    assert bundle.included_chunk_ids == ()
    assert SOURCE in bundle.user_text
    assert ERROR_TEXT in bundle.user_text
    assert bundle.token_estimate > 0


def test_baseline_is_byte_deterministic():
    a = build_baseline_prompt(SOURCE, ERROR_TEXT)
    b = build_baseline_prompt(SOURCE, ERROR_TEXT)
    assert a == b


def test_baseline_requires_error_text():
    with pytest.raises(InputError):
        build_baseline_prompt(SOURCE, "")


def test_rails_with_four_hits_renders_blocks_in_score_order():
    hits = [hit(i, 1.0 - i / 10, text=f"chunk body {i}", doc=f"d{i}.md") for i in range(4)]
    bundle = build_rails_prompt(SOURCE, ERROR_TEXT, hits)
    assert bundle.variant == "rails"
    assert bundle.included_chunk_ids == (0, 1, 2, 3)
    positions = [bundle.user_text.index(f"chunk body {i}") for i in range(4)]
    assert positions == sorted(positions)
    for i in range(4):
        assert f"d{i}.md" in bundle.user_text


def test_rails_with_no_hits_has_empty_context_marker():
    bundle = build_rails_prompt(SOURCE, ERROR_TEXT, [])
    assert EMPTY_CONTEXT_MARKER in bundle.user_text
    assert bundle.included_chunk_ids == ()


def test_rails_differs_from_baseline_only_by_context_section():
    hits = [hit(1, 0.9, text="ctx body", doc="d.md")]
    rails = build_rails_prompt(SOURCE, ERROR_TEXT, hits)
    baseline = build_baseline_prompt(SOURCE, ERROR_TEXT)
    context_block = "### Documentation context\n[1] d.md (score=0.9000)\nctx body\n\n"
    assert context_block in rails.user_text
    assert rails.user_text.replace(context_block, "") == baseline.user_text


def test_rails_token_budget_drops_lowest_scored_chunk_first():
    hits = [
        hit(1, 0.9, text="A" * 2000),
        hit(2, 0.8, text="B" * 2000),
        hit(3, 0.7, text="C" * 2000),
    ]
    bundle = build_rails_prompt(SOURCE, ERROR_TEXT, hits, token_budget=1300)
    assert bundle.included_chunk_ids == (1, 2)
    assert "C" * 2000 not in bundle.user_text
    assert "A" * 2000 in bundle.user_text


def test_rails_truncation_never_drops_every_chunk():
    hits = [hit(1, 0.9, text="A" * 4000)]
    bundle = build_rails_prompt(SOURCE, ERROR_TEXT, hits, token_budget=10)
    assert bundle.included_chunk_ids == (1,)


def test_source_is_verbatim_in_every_variant():
    hits = [hit(1, 0.5)]
    rails = build_rails_prompt(SOURCE, ERROR_TEXT, hits)
    baseline = build_baseline_prompt(SOURCE, ERROR_TEXT)
    refinement = build_refinement_prompt(rails, "class X {}", "err2", [])
    for bundle in (rails, baseline, refinement):
        assert SOURCE in bundle.user_text
        assert bundle.source == SOURCE


# ===================================================================
# refinement prompts
# ===================================================================


def test_refinement_contains_attempt_and_new_error():
    previous = build_rails_prompt(SOURCE, ERROR_TEXT, [hit(1, 0.5)])
    fix = "public class Main { int x; }"
    new_error = "Main.java:1: error: something else\n1 error"
    bundle = build_refinement_prompt(previous, fix, new_error, [hit(2, 0.4)])
    assert bundle.variant == "refinement"
    assert fix in bundle.user_text
    assert new_error in bundle.user_text
    assert bundle.included_chunk_ids == (2,)


def test_refinement_replaces_context_with_fresh_hits():
    previous = build_rails_prompt(SOURCE, ERROR_TEXT, [hit(1, 0.5, text="old ctx")])
    bundle = build_refinement_prompt(previous, "fix", "err", [hit(9, 0.6, text="new ctx")])
    assert "new ctx" in bundle.user_text
    assert "old ctx" not in bundle.user_text


def test_refinement_is_deterministic():
    previous = build_rails_prompt(SOURCE, ERROR_TEXT, [])
    a = build_refinement_prompt(previous, "fix", "err", [])
    b = build_refinement_prompt(previous, "fix", "err", [])
    assert a == b


def test_refinement_requires_previous_fix():
    previous = build_baseline_prompt(SOURCE, ERROR_TEXT)
    with pytest.raises(InputError):
        build_refinement_prompt(previous, "", "err", [])


# ===================================================================
# template overrides
# ===================================================================


def test_load_templates_partial_override(tmp_path):
    (tmp_path / "system.txt").write_text("custom system", encoding="utf-8")
    templates = load_templates(tmp_path)
    assert templates.system == "custom system"
    assert templates.baseline == DEFAULT_TEMPLATES.baseline


def test_custom_templates_flow_through():
    templates = PromptTemplates(
        system="sys", baseline="B {{code}} {{error}}", rails="R", refinement="F"
    )
    bundle = build_baseline_prompt("CODE", "ERR", templates)
    assert bundle.user_text == "B CODE ERR"
    assert bundle.system_text == "sys"


# ===================================================================
# extract_code
# ===================================================================


def test_extract_fenced_block():
    reply = "Here you go:\n```java\nclass A {}\n```\nHope that helps."
    assert extract_code(reply) == "class A {}"


def test_extract_first_of_multiple_fences():
    reply = "```java\nclass First {}\n```\ntext\n```java\nclass Second {}\n```"
    assert extract_code(reply) == "class First {}"


def test_extract_unfenced_import_suffix():
    reply = (
        "The fix is to add the import.\n"
        "import java.util.ArrayList;\n"
        "public class Main { ArrayList<String> xs; }"
    )
    extracted = extract_code(reply)
    assert extracted.startswith("import java.util.ArrayList;")
    assert "public class Main" in extracted
    assert "The fix is" not in extracted


def test_extract_unfenced_class_suffix():
    reply = "Sure!\npublic class Main { }\n"
    assert extract_code(reply) == "public class Main { }"


def test_extract_plain_reply_returned_trimmed():
    assert extract_code("  int x = 1;  ") == "int x = 1;"


def test_extract_empty_reply_is_error():
    with pytest.raises(InputError, match="no content"):
        extract_code("")
    with pytest.raises(InputError):
        extract_code("   \n  ")


@settings(max_examples=100, deadline=None)
@given(
    # Any fence-free, linefeed-normalized code; a trailing \r would merge into
    # the closing fence's CRLF and is deliberately stripped by the extractor.
    st.text(
        alphabet=st.characters(blacklist_characters="`\r", blacklist_categories=("Cs",)),
        max_size=300,
    )
)
def test_extract_inverts_fence_wrapping(code):
    wrapped = f"```java\n{code}\n```"
    assert extract_code(wrapped) == code


def test_extract_handles_crlf_fences():
    assert extract_code("```java\r\nclass A {}\r\n```") == "class A {}"
