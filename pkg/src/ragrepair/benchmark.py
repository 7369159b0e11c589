"""Benchmark harness: load broken-Java cases, run pipelines, score, report.

A case is a directory holding one ``.java`` source (which must fail to
compile as given) and a ``case.json`` with expected imports, declared-missing
external packages, and identifiers the fix must preserve.  Scoring is a pure
function of (case, outcome), so logged outcomes replay to identical verdicts.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from copy import deepcopy
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CaseValidationError, RagRepairError
from .java_compiler import CompilerConfig, compiler_version, mask_comments_and_strings
from .llm_client import make_client
from .repair_loop import (
    PIPELINES,
    STATUS_COMPILED,
    STATUS_FAILED,
    STATUS_SEMANTIC_ONLY,
    RepairConfig,
    RepairOutcome,
    outcome_from_dict,
    outcome_to_dict,
    repair,
)
from .vector_index import payload_sha256

CATEGORIES = (
    "standard_jdk",
    "deprecated_api",
    "swing_ui",
    "nio_file",
    "external_commons",
    "external_gson_text",
    "javafx_gui",
    "custom_utility",
)

COUNT_KEYS = ("compiled", "semantic_only", "failed", "hallucinated")


@dataclass(frozen=True)
class CaseSpec:
    case_id: str
    category: str
    source: str
    expected_imports: tuple[str, ...] = ()
    expected_external_packages: tuple[str, ...] = ()
    required_identifiers: tuple[str, ...] = ()
    source_file: str = ""


@dataclass
class CaseResult:
    case_id: str
    pipeline: str
    outcome: RepairOutcome
    semantic_correct: bool
    hallucination: bool
    wall_time_ms: float
    category: str


@dataclass
class BenchReport:
    results: list[CaseResult] = field(default_factory=list)
    category_fractions: dict[str, dict[str, float]] = field(default_factory=dict)
    counts: dict[str, dict[str, int]] = field(default_factory=dict)
    mean_latency_ms: dict[str, float] = field(default_factory=dict)
    mean_retrieval_ms: dict[str, float] = field(default_factory=dict)
    environment: dict[str, str] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Case loading
# ---------------------------------------------------------------------------

_CASE_FIELDS = {
    "case_id": str,
    "category": str,
    "expected_imports": list,
    "expected_external_packages": list,
    "required_identifiers": list,
}


def load_cases(
    cases_dir: str | Path, compiler: CompilerConfig | None = None
) -> list[CaseSpec]:
    """Load and validate every case under ``cases_dir`` in case-id order.

    When a compiler config is given, each source is probed and must fail to
    compile as written.
    """
    root = Path(cases_dir)
    if not root.is_dir():
        raise CaseValidationError(f"cases directory not found: {root}")
    case_dirs = sorted((p for p in root.iterdir() if p.is_dir()), key=lambda p: p.name)
    if not case_dirs:
        raise CaseValidationError(f"no cases found under {root}")
    specs: list[CaseSpec] = []
    seen_ids: set[str] = set()
    for case_dir in case_dirs:
        meta_path = case_dir / "case.json"
        if not meta_path.is_file():
            raise CaseValidationError(f"case {case_dir.name}: missing case.json")
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CaseValidationError(f"case {case_dir.name}: invalid case.json: {exc}")
        for fname, ftype in _CASE_FIELDS.items():
            if fname not in meta:
                raise CaseValidationError(f"case {case_dir.name}: missing field {fname}")
            if not isinstance(meta[fname], ftype):
                raise CaseValidationError(
                    f"case {case_dir.name}: field {fname} must be {ftype.__name__}"
                )
        case_id = meta["case_id"]
        if case_id != case_dir.name:
            raise CaseValidationError(
                f"case {case_dir.name}: field case_id is {case_id!r}, expected the directory name"
            )
        if case_id in seen_ids:
            raise CaseValidationError(f"duplicate case_id {case_id!r}")
        seen_ids.add(case_id)
        if meta["category"] not in CATEGORIES:
            raise CaseValidationError(
                f"case {case_id}: field category has unknown value {meta['category']!r}"
            )
        java_files = sorted(case_dir.glob("*.java"))
        if len(java_files) != 1:
            raise CaseValidationError(
                f"case {case_id}: expected exactly one .java file, found {len(java_files)}"
            )
        source = java_files[0].read_text(encoding="utf-8")
        spec = CaseSpec(
            case_id=case_id,
            category=meta["category"],
            source=source,
            expected_imports=tuple(meta["expected_imports"]),
            expected_external_packages=tuple(meta["expected_external_packages"]),
            required_identifiers=tuple(meta["required_identifiers"]),
            source_file=java_files[0].name,
        )
        if compiler is not None:
            _probe_brokenness(spec, compiler)
        specs.append(spec)
    return specs


def _probe_brokenness(spec: CaseSpec, compiler: CompilerConfig) -> None:
    from .java_compiler import compile_source, extract_class_name

    result = compile_source(spec.source, extract_class_name(spec.source), compiler)
    if result.success:
        raise CaseValidationError(
            f"case {spec.case_id}: source already compiles; cases must be broken as given"
        )


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

_IMPORT_STMT_RE = re.compile(
    r"^\s*import\s+(?:static\s+)?([A-Za-z_$][\w$.]*(?:\.\*)?)\s*;", re.MULTILINE
)


def parse_import_statements(code: str) -> set[str]:
    """Fully-qualified names imported by ``code`` (comments/strings ignored)."""
    return set(_IMPORT_STMT_RE.findall(mask_comments_and_strings(code)))


def _import_covered(fqn: str, statements: set[str]) -> bool:
    if fqn in statements:
        return True
    if "." in fqn:
        return f"{fqn.rsplit('.', 1)[0]}.*" in statements
    return False


def external_symbol_map(spec: CaseSpec) -> dict[str, str]:
    """Map simple class names to the expected external package declaring them."""
    mapping: dict[str, str] = {}
    for fqn in spec.expected_imports:
        if "." not in fqn:
            continue
        pkg, cls = fqn.rsplit(".", 1)
        if any(
            pkg == e or pkg.startswith(e + ".") for e in spec.expected_external_packages
        ):
            mapping[cls] = pkg
    return mapping


def score_semantic(spec: CaseSpec, outcome: RepairOutcome) -> tuple[bool, bool]:
    """Return (semantic_correct, hallucination) for one finished case.

    Correct means the loop ended compiled or dependency-blocked, every expected
    import is present as a parsed import statement (a wildcard import of the
    enclosing package counts), and every required identifier survived.  A fix
    that dropped a required identifier while the model did produce output is a
    hallucination.
    """
    statements = parse_import_statements(outcome.final_code)
    imports_ok = all(_import_covered(f, statements) for f in spec.expected_imports)
    identifiers_ok = all(ident in outcome.final_code for ident in spec.required_identifiers)
    produced_output = any(r.model_reply.strip() for r in outcome.iterations)
    semantic_correct = (
        outcome.status in (STATUS_COMPILED, STATUS_SEMANTIC_ONLY)
        and imports_ok
        and identifiers_ok
    )
    hallucination = produced_output and not identifiers_ok
    return semantic_correct, hallucination


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


def run_benchmark(
    cases: list[CaseSpec],
    pipelines: list[str],
    configs: dict[str, RepairConfig],
    out_dir: str | Path | None = None,
    workers: int = 1,
) -> BenchReport:
    """Run every (case, pipeline) pair once and aggregate a report.

    Case failures (transport, scripts, environment) are recorded in-report and
    never abort the run.  Aggregation is a deterministic fold in
    (pipeline, case_id) order regardless of worker count.
    """
    for pipeline in pipelines:
        if pipeline not in PIPELINES:
            raise CaseValidationError(f"unknown pipeline {pipeline!r}")
        if pipeline not in configs:
            raise CaseValidationError(f"no config supplied for pipeline {pipeline!r}")
    logs_dir = Path(out_dir) / "logs" if out_dir is not None else None
    clients = {p: make_client(configs[p].llm) for p in pipelines}

    def run_one(pipeline: str, spec: CaseSpec) -> CaseResult:
        config = dataclasses.replace(
            configs[pipeline],
            pipeline=pipeline,
            expected_external_packages=spec.expected_external_packages,
            external_symbols=external_symbol_map(spec),
            logs_dir=logs_dir,
        )
        started = time.perf_counter()
        try:
            outcome = repair(spec.source, spec.case_id, config, client=clients[pipeline])
        except RagRepairError as exc:
            outcome = RepairOutcome(
                status=STATUS_FAILED,
                final_code=spec.source,
                iterations=[],
                total_latency_ms=(time.perf_counter() - started) * 1000.0,
                error=str(exc),
            )
        wall_ms = (time.perf_counter() - started) * 1000.0
        correct, hallucination = score_semantic(spec, outcome)
        return CaseResult(
            case_id=spec.case_id,
            pipeline=pipeline,
            outcome=outcome,
            semantic_correct=correct,
            hallucination=hallucination,
            wall_time_ms=wall_ms,
            category=spec.category,
        )

    jobs = [(pipeline, spec) for pipeline in pipelines for spec in cases]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: run_one(*job), jobs))
    else:
        results = [run_one(*job) for job in jobs]
    results.sort(key=lambda r: (PIPELINES.index(r.pipeline), r.case_id))

    report = BenchReport(results=results)
    report.category_fractions = compute_category_fractions(results)
    for pipeline in pipelines:
        rows = [r for r in results if r.pipeline == pipeline]
        counts = {
            "compiled": sum(r.outcome.status == STATUS_COMPILED for r in rows),
            "semantic_only": sum(r.outcome.status == STATUS_SEMANTIC_ONLY for r in rows),
            "failed": sum(r.outcome.status == STATUS_FAILED for r in rows),
            "hallucinated": sum(r.hallucination for r in rows),
        }
        report.counts[pipeline] = counts
        report.mean_latency_ms[pipeline] = (
            sum(r.wall_time_ms for r in rows) / len(rows) if rows else 0.0
        )
        retrievals = [
            rec.retrieval_ms for r in rows for rec in r.outcome.iterations
        ]
        report.mean_retrieval_ms[pipeline] = (
            sum(retrievals) / len(retrievals) if retrievals else 0.0
        )

    any_config = configs[pipelines[0]]
    environment = {
        "compiler_version": compiler_version(any_config.compiler),
        "case_count": str(len(cases)),
    }
    for pipeline in pipelines:
        cfg = configs[pipeline]
        environment[f"{pipeline}_provider"] = f"{cfg.llm.kind}:{cfg.llm.model_name}"
        if cfg.index_path:
            environment[f"{pipeline}_index_sha256"] = payload_sha256(cfg.index_path)
    environment["embedder"] = (
        f"{any_config.embedder.kind}:dim={any_config.embedder.dim}"
    )
    report.environment = environment

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        emit_report(report, out / "report.json")
        emit_table(report, out / "table.txt")
        from .radar import emit_radar_svg

        emit_radar_svg(report, out / "radar.svg")
    return report


def compute_category_fractions(results: list[CaseResult]) -> dict[str, dict[str, float]]:
    """Per category and pipeline: fraction of cases scored semantically correct."""
    fractions: dict[str, dict[str, float]] = {}
    categories = sorted(
        {r.category for r in results},
        key=lambda c: (CATEGORIES.index(c) if c in CATEGORIES else len(CATEGORIES), c),
    )
    pipelines = sorted({r.pipeline for r in results}, key=PIPELINES.index)
    for category in categories:
        fractions[category] = {}
        for pipeline in pipelines:
            rows = [r for r in results if r.category == category and r.pipeline == pipeline]
            if rows:
                fractions[category][pipeline] = sum(
                    r.semantic_correct for r in rows
                ) / len(rows)
    return fractions


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------


def result_to_dict(result: CaseResult) -> dict:
    return {
        "case_id": result.case_id,
        "pipeline": result.pipeline,
        "outcome": outcome_to_dict(result.outcome),
        "semantic_correct": result.semantic_correct,
        "hallucination": result.hallucination,
        "wall_time_ms": result.wall_time_ms,
        "category": result.category,
    }


def result_from_dict(data: dict) -> CaseResult:
    return CaseResult(
        case_id=data["case_id"],
        pipeline=data["pipeline"],
        outcome=outcome_from_dict(data["outcome"]),
        semantic_correct=data["semantic_correct"],
        hallucination=data["hallucination"],
        wall_time_ms=data["wall_time_ms"],
        category=data["category"],
    )


def report_to_dict(report: BenchReport) -> dict:
    return {
        "results": [result_to_dict(r) for r in report.results],
        "category_fractions": report.category_fractions,
        "counts": report.counts,
        "mean_latency_ms": report.mean_latency_ms,
        "mean_retrieval_ms": report.mean_retrieval_ms,
        "environment": report.environment,
    }


def report_from_dict(data: dict) -> BenchReport:
    return BenchReport(
        results=[result_from_dict(r) for r in data["results"]],
        category_fractions=data["category_fractions"],
        counts=data["counts"],
        mean_latency_ms=data["mean_latency_ms"],
        mean_retrieval_ms=data["mean_retrieval_ms"],
        environment=data["environment"],
    )


def emit_report(report: BenchReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report_to_dict(report), sort_keys=True, indent=1), encoding="utf-8"
    )


def load_report(path: str | Path) -> BenchReport:
    return report_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


_TIMING_KEYS = {
    "wall_time_ms",
    "total_latency_ms",
    "turn_latency_ms",
    "retrieval_ms",
    "duration_ms",
    "latency_ms",
}


def _zero_timings(node):
    if isinstance(node, dict):
        return {
            k: (0.0 if k in _TIMING_KEYS else _zero_timings(v)) for k, v in node.items()
        }
    if isinstance(node, list):
        return [_zero_timings(v) for v in node]
    return node


def report_digest(report: BenchReport) -> str:
    """Digest of the report with timings zeroed; equal across identical runs."""
    canonical = _zero_timings(deepcopy(report_to_dict(report)))
    canonical["mean_latency_ms"] = {k: 0.0 for k in canonical.get("mean_latency_ms", {})}
    canonical["mean_retrieval_ms"] = {
        k: 0.0 for k in canonical.get("mean_retrieval_ms", {})
    }
    blob = json.dumps(canonical, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


# ---------------------------------------------------------------------------
# Plain-text table
# ---------------------------------------------------------------------------


def render_table(report: BenchReport) -> str:
    """Aligned text table: one row per category, RAILS column before Baseline."""
    pipelines = [p for p in ("rails", "baseline") if p in report.counts] or [
        "rails",
        "baseline",
    ]
    display = {"rails": "RAILS", "baseline": "Baseline"}
    header = ["case category"] + [display.get(p, p) for p in pipelines]
    rows = [header]
    for category, per_pipeline in report.category_fractions.items():
        row = [category]
        for pipeline in pipelines:
            frac = per_pipeline.get(pipeline)
            row.append("-" if frac is None else f"{frac:.2f}")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]

    def fmt(row: list[str]) -> str:
        return "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()

    lines = ["Semantic correctness by case category", ""]
    lines.append(fmt(header))
    lines.append(fmt(["-" * w for w in widths]))
    lines.extend(fmt(r) for r in rows[1:])
    lines.append("")
    lines.append("Outcome counts")
    count_header = ["outcome"] + [display.get(p, p) for p in pipelines]
    count_rows = [count_header]
    for key in COUNT_KEYS:
        count_rows.append(
            [key] + [str(report.counts.get(p, {}).get(key, 0)) for p in pipelines]
        )
    count_rows.append(
        ["semantic_correct"]
        + [
            str(sum(1 for r in report.results if r.pipeline == p and r.semantic_correct))
            for p in pipelines
        ]
    )
    cwidths = [max(len(r[i]) for r in count_rows) for i in range(len(count_header))]

    def cfmt(row: list[str]) -> str:
        return "  ".join(cell.ljust(width) for cell, width in zip(row, cwidths)).rstrip()

    lines.append(cfmt(count_header))
    lines.append(cfmt(["-" * w for w in cwidths]))
    lines.extend(cfmt(r) for r in count_rows[1:])
    lines.append("")
    lines.append("Mean wall time per case (ms)")
    for pipeline in pipelines:
        lines.append(
            f"{display.get(pipeline, pipeline)}: "
            f"{report.mean_latency_ms.get(pipeline, 0.0):.1f}"
        )
    lines.append("")
    lines.append("Environment")
    for key in sorted(report.environment):
        lines.append(f"{key}: {report.environment[key]}")
    return "\n".join(lines) + "\n"


def emit_table(report: BenchReport, path: str | Path) -> None:
    Path(path).write_text(render_table(report), encoding="utf-8")
