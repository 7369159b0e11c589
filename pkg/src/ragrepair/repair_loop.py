"""The compile -> diagnose -> retrieve -> prompt -> generate -> recompile loop.

One repair session is strictly sequential; distinct sessions are independent
and may run concurrently (the vector index is read-only once loaded).  Every
turn is recorded in full, and when a logs directory is configured each session
appends a JSON-lines trace plus a human-readable transcript.
"""

from __future__ import annotations

import dataclasses
import json
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from .embedding import EmbeddingProviderConfig, embed_text
from .errors import ConfigError, InputError, TransportError
from .java_compiler import (
    CompileResult,
    CompilerConfig,
    Diagnostic,
    extract_class_name,
    is_missing_dependency_only,
    resolve_compiler,
)
from .llm_client import LlmClient, LlmConfig, make_client
from .prompting import (
    DEFAULT_TEMPLATES,
    DEFAULT_TOKEN_BUDGET,
    PromptBundle,
    PromptTemplates,
    build_baseline_prompt,
    build_rails_prompt,
    build_refinement_prompt,
    build_retrieval_query,
    extract_code,
)
from .vector_index import SearchHit, VectorIndex

PIPELINE_BASELINE = "baseline"
PIPELINE_RAILS = "rails"
PIPELINES = (PIPELINE_BASELINE, PIPELINE_RAILS)

STATUS_COMPILED = "compiled"
STATUS_SEMANTIC_ONLY = "semantic_only"
STATUS_FAILED = "failed"
STATUS_ALREADY_COMPILES = "already_compiles"


@dataclass(frozen=True)
class RepairConfig:
    pipeline: str = PIPELINE_BASELINE
    max_iterations: int = 3
    top_k: int = 4
    index_path: str | Path | None = None
    llm: LlmConfig = field(default_factory=LlmConfig)
    compiler: CompilerConfig = field(default_factory=CompilerConfig)
    expected_external_packages: tuple[str, ...] = ()
    external_symbols: dict[str, str] = field(default_factory=dict)
    embedder: EmbeddingProviderConfig = field(default_factory=EmbeddingProviderConfig)
    templates: PromptTemplates = DEFAULT_TEMPLATES
    token_budget: int = DEFAULT_TOKEN_BUDGET
    logs_dir: str | Path | None = None

    def __post_init__(self):
        if self.pipeline not in PIPELINES:
            raise ConfigError(f"unknown pipeline: {self.pipeline!r}")
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")
        if self.pipeline == PIPELINE_RAILS and not self.index_path:
            raise ConfigError("rails pipeline requires index_path")


@dataclass
class IterationRecord:
    turn: int
    prompt: PromptBundle
    model_reply: str
    extracted_code: str
    compile_result: CompileResult
    retrieval_hits: tuple[SearchHit, ...]
    turn_latency_ms: float
    retrieval_ms: float = 0.0


@dataclass
class RepairOutcome:
    status: str
    final_code: str
    iterations: list[IterationRecord]
    total_latency_ms: float
    initial_result: CompileResult | None = None
    error: str | None = None


def classify_result(
    result: CompileResult,
    expected_external_packages: tuple[str, ...] | list[str],
    external_symbols: dict[str, str] | None = None,
) -> str | None:
    """Terminal status implied by one compile result, or None to keep iterating.

    Pure function of its inputs, so a logged session can be replayed and must
    reproduce the recorded outcome.
    """
    if result.success:
        return STATUS_COMPILED
    if result.error_diagnostics and is_missing_dependency_only(
        result.diagnostics,
        expected_external_packages,
        external_symbols=external_symbols,
    ):
        return STATUS_SEMANTIC_ONLY
    return None


def repair(
    source: str,
    case_id: str,
    config: RepairConfig,
    *,
    client: LlmClient | None = None,
    index: VectorIndex | None = None,
) -> RepairOutcome:
    """Run one repair session until success, semantic acceptance, or the cap.

    Environment problems (missing compiler, unreadable index) raise before any
    model call; transport failures mark the outcome failed with the error
    attached instead of crashing the harness.
    """
    if not source.strip():
        raise InputError("source is empty")
    start = time.perf_counter()
    resolve_compiler(config.compiler.compiler_path)
    rails = config.pipeline == PIPELINE_RAILS
    if rails and index is None:
        index = VectorIndex.load(config.index_path)
    if client is None:
        client = make_client(config.llm)

    if config.logs_dir is not None:
        work_root = Path(config.logs_dir) / config.pipeline / case_id / "work"
    else:
        work_root = Path(tempfile.mkdtemp(prefix=f"ragrepair-{config.pipeline}-"))

    class_name = extract_class_name(source)
    initial = _compile_turn(source, class_name, config, work_root, turn=0)
    if initial.success:
        outcome = RepairOutcome(
            status=STATUS_ALREADY_COMPILES,
            final_code=source,
            iterations=[],
            total_latency_ms=(time.perf_counter() - start) * 1000.0,
            initial_result=initial,
        )
        _write_session_logs(outcome, case_id, config)
        return outcome

    records: list[IterationRecord] = []
    previous_result = initial
    previous_bundle: PromptBundle | None = None
    previous_code = ""
    status: str | None = None
    error: str | None = None

    for turn in range(1, config.max_iterations + 1):
        turn_start = time.perf_counter()
        hits: tuple[SearchHit, ...] = ()
        retrieval_ms = 0.0
        if rails:
            retrieval_start = time.perf_counter()
            query = build_retrieval_query(source, previous_result.diagnostics)
            query_vector = embed_text(query, config.embedder)
            hits = tuple(index.search(query_vector, config.top_k))
            retrieval_ms = (time.perf_counter() - retrieval_start) * 1000.0

        error_text = previous_result.raw_output
        if turn == 1:
            if rails:
                bundle = build_rails_prompt(
                    source, error_text, hits, config.templates, config.token_budget
                )
            else:
                bundle = build_baseline_prompt(source, error_text, config.templates)
        else:
            bundle = build_refinement_prompt(
                previous_bundle,
                previous_code,
                error_text,
                hits,
                config.templates,
                config.token_budget,
            )

        try:
            response = client.generate(bundle, case_id=case_id, turn=turn)
            extracted = extract_code(response.text)
        except (TransportError, InputError) as exc:
            error = str(exc)
            break

        try:
            fix_class = extract_class_name(extracted)
        except InputError:
            fix_class = class_name
        compile_result = _compile_turn(extracted, fix_class, config, work_root, turn)
        records.append(
            IterationRecord(
                turn=turn,
                prompt=bundle,
                model_reply=response.text,
                extracted_code=extracted,
                compile_result=compile_result,
                retrieval_hits=hits,
                turn_latency_ms=(time.perf_counter() - turn_start) * 1000.0,
                retrieval_ms=retrieval_ms,
            )
        )
        previous_bundle = bundle
        previous_code = extracted
        previous_result = compile_result
        status = classify_result(
            compile_result, config.expected_external_packages, config.external_symbols
        )
        if status is not None:
            break

    final_code = records[-1].extracted_code if records else source
    outcome = RepairOutcome(
        status=status or STATUS_FAILED,
        final_code=final_code,
        iterations=records,
        total_latency_ms=(time.perf_counter() - start) * 1000.0,
        initial_result=initial,
        error=error,
    )
    _write_session_logs(outcome, case_id, config)
    return outcome


def _compile_turn(
    code: str, class_name: str, config: RepairConfig, work_root: Path, turn: int
) -> CompileResult:
    from .java_compiler import compile_source

    turn_config = dataclasses.replace(
        config.compiler, work_dir=work_root / f"turn{turn}"
    )
    return compile_source(code, class_name, turn_config)


# ---------------------------------------------------------------------------
# Serialization and session logs
# ---------------------------------------------------------------------------


def diagnostic_to_dict(diag: Diagnostic) -> dict:
    return {
        "file": diag.file,
        "line": diag.line,
        "severity": diag.severity,
        "kind": diag.kind,
        "symbol": diag.symbol,
        "package": diag.package,
        "message": diag.message,
    }


def diagnostic_from_dict(data: dict) -> Diagnostic:
    return Diagnostic(**data)


def compile_result_to_dict(result: CompileResult) -> dict:
    return {
        "success": result.success,
        "diagnostics": [diagnostic_to_dict(d) for d in result.diagnostics],
        "raw_output": result.raw_output,
        "duration_ms": result.duration_ms,
    }


def compile_result_from_dict(data: dict) -> CompileResult:
    return CompileResult(
        success=data["success"],
        diagnostics=[diagnostic_from_dict(d) for d in data["diagnostics"]],
        raw_output=data["raw_output"],
        duration_ms=data["duration_ms"],
    )


def bundle_to_dict(bundle: PromptBundle) -> dict:
    return {
        "system_text": bundle.system_text,
        "user_text": bundle.user_text,
        "variant": bundle.variant,
        "included_chunk_ids": list(bundle.included_chunk_ids),
        "token_estimate": bundle.token_estimate,
        "source": bundle.source,
    }


def bundle_from_dict(data: dict) -> PromptBundle:
    return PromptBundle(
        system_text=data["system_text"],
        user_text=data["user_text"],
        variant=data["variant"],
        included_chunk_ids=tuple(data["included_chunk_ids"]),
        token_estimate=data["token_estimate"],
        source=data["source"],
    )


def hit_to_dict(hit: SearchHit) -> dict:
    return {
        "chunk_id": hit.chunk_id,
        "score": hit.score,
        "text": hit.text,
        "doc_id": hit.doc_id,
    }


def hit_from_dict(data: dict) -> SearchHit:
    return SearchHit(**data)


def record_to_dict(record: IterationRecord) -> dict:
    return {
        "turn": record.turn,
        "prompt": bundle_to_dict(record.prompt),
        "model_reply": record.model_reply,
        "extracted_code": record.extracted_code,
        "compile_result": compile_result_to_dict(record.compile_result),
        "retrieval_hits": [hit_to_dict(h) for h in record.retrieval_hits],
        "turn_latency_ms": record.turn_latency_ms,
        "retrieval_ms": record.retrieval_ms,
    }


def record_from_dict(data: dict) -> IterationRecord:
    return IterationRecord(
        turn=data["turn"],
        prompt=bundle_from_dict(data["prompt"]),
        model_reply=data["model_reply"],
        extracted_code=data["extracted_code"],
        compile_result=compile_result_from_dict(data["compile_result"]),
        retrieval_hits=tuple(hit_from_dict(h) for h in data["retrieval_hits"]),
        turn_latency_ms=data["turn_latency_ms"],
        retrieval_ms=data["retrieval_ms"],
    )


def outcome_to_dict(outcome: RepairOutcome) -> dict:
    return {
        "status": outcome.status,
        "final_code": outcome.final_code,
        "iterations": [record_to_dict(r) for r in outcome.iterations],
        "total_latency_ms": outcome.total_latency_ms,
        "initial_result": (
            compile_result_to_dict(outcome.initial_result)
            if outcome.initial_result
            else None
        ),
        "error": outcome.error,
    }


def outcome_from_dict(data: dict) -> RepairOutcome:
    return RepairOutcome(
        status=data["status"],
        final_code=data["final_code"],
        iterations=[record_from_dict(r) for r in data["iterations"]],
        total_latency_ms=data["total_latency_ms"],
        initial_result=(
            compile_result_from_dict(data["initial_result"])
            if data.get("initial_result")
            else None
        ),
        error=data.get("error"),
    )


def _write_session_logs(outcome: RepairOutcome, case_id: str, config: RepairConfig) -> None:
    if config.logs_dir is None:
        return
    logs_dir = Path(config.logs_dir)
    case_dir = logs_dir / config.pipeline
    case_dir.mkdir(parents=True, exist_ok=True)
    jsonl_path = case_dir / f"{case_id}.jsonl"
    with jsonl_path.open("w", encoding="utf-8") as fh:
        for record in outcome.iterations:
            fh.write(json.dumps(record_to_dict(record), sort_keys=True) + "\n")
    transcript = _render_transcript(outcome, case_id, config.pipeline)
    aggregate = logs_dir / f"log_{config.pipeline}.txt"
    with aggregate.open("a", encoding="utf-8") as fh:
        fh.write(transcript)


def _render_transcript(outcome: RepairOutcome, case_id: str, pipeline: str) -> str:
    lines = [f"==== case {case_id} ({pipeline}) ===="]
    if outcome.initial_result is not None:
        lines.append("-- initial compile --")
        lines.append(outcome.initial_result.raw_output.rstrip("\n"))
    for record in outcome.iterations:
        lines.append(f"-- turn {record.turn} prompt ({record.prompt.variant}) --")
        lines.append(record.prompt.user_text)
        lines.append(f"-- turn {record.turn} model reply --")
        lines.append(record.model_reply)
        lines.append(f"-- turn {record.turn} compile --")
        lines.append(record.compile_result.raw_output.rstrip("\n"))
    if outcome.error:
        lines.append(f"-- error: {outcome.error} --")
    lines.append(
        f"==== outcome: {outcome.status} "
        f"({len(outcome.iterations)} turns, {outcome.total_latency_ms:.0f} ms) ===="
    )
    return "\n".join(lines) + "\n\n"
