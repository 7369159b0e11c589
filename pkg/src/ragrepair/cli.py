"""Command-line driver: ingest / repair / bench / report subcommands.

Settings come from an optional INI config file; command-line flags override
file values, and secrets are taken from environment variables only (never from
flags).  Exit codes are a stable contract: 0 success, 2 configuration error,
3 environment or transport error; ``repair`` additionally exits 10 for a
dependency-blocked fix, 11 for a failed repair, and 12 when the input already
compiles.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

from .errors import (
    CaseValidationError,
    ConfigError,
    CorpusError,
    IndexFormatError,
    InputError,
    RagRepairError,
    ScriptExhaustedError,
    ToolchainError,
    TransportError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ENVIRONMENT = 3
EXIT_SEMANTIC_ONLY = 10
EXIT_FAILED = 11
EXIT_ALREADY_COMPILES = 12

_CONFIG_EXITS = (ConfigError, InputError, CaseValidationError, CorpusError, ScriptExhaustedError)
_ENVIRONMENT_EXITS = (ToolchainError, TransportError, IndexFormatError)


def _load_ini(path: str | None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    if path:
        if not Path(path).is_file():
            raise ConfigError(f"config file not found: {path}")
        parser.read(path, encoding="utf-8")
    return parser


def _ini_get(ini: configparser.ConfigParser, section: str, option: str, fallback=None):
    if ini.has_option(section, option):
        return ini.get(section, option)
    return fallback


def _arg(args, name):
    return getattr(args, name, None)


def _chunking_config(args, ini):
    from .corpus import ChunkingConfig

    chunk_size = _arg(args, "chunk_size")
    overlap = _arg(args, "overlap")
    return ChunkingConfig(
        chunk_size=chunk_size
        if chunk_size is not None
        else int(_ini_get(ini, "chunking", "chunk_size", 300)),
        overlap=overlap
        if overlap is not None
        else int(_ini_get(ini, "chunking", "overlap", 50)),
    )


def _embedder_config(args, ini):
    from .embedding import OFFLINE_DIM, REMOTE_DEFAULT_DIM, EmbeddingProviderConfig

    provider = _arg(args, "provider") or _ini_get(ini, "embedding", "kind", "offline")
    kind = "offline_hash" if provider in ("offline", "offline_hash") else "remote"
    if kind == "offline_hash":
        dim = _arg(args, "dim") or int(_ini_get(ini, "embedding", "dim", OFFLINE_DIM))
        return EmbeddingProviderConfig(kind=kind, dim=dim)
    return EmbeddingProviderConfig(
        kind="remote",
        endpoint_url=_arg(args, "embed_endpoint")
        or _ini_get(ini, "embedding", "endpoint_url", ""),
        model_name=_arg(args, "embed_model")
        or _ini_get(ini, "embedding", "model_name", "text-embedding-ada-002"),
        api_key_env_var=_arg(args, "api_key_env")
        or _ini_get(ini, "embedding", "api_key_env_var", "OPENAI_API_KEY"),
        dim=_arg(args, "dim") or int(_ini_get(ini, "embedding", "dim", REMOTE_DEFAULT_DIM)),
    )


def _compiler_config(args, ini):
    from .java_compiler import CompilerConfig

    classpath = tuple(_arg(args, "classpath") or ()) or tuple(
        e for e in str(_ini_get(ini, "compiler", "classpath", "")).split(":") if e
    )
    return CompilerConfig(
        compiler_path=_arg(args, "compiler")
        or _ini_get(ini, "compiler", "compiler_path", "javac"),
        classpath_entries=classpath,
        timeout=float(_ini_get(ini, "compiler", "timeout", 30.0)),
    )


def _llm_config(args, ini, script_path=None):
    from .llm_client import LlmConfig

    script = script_path or _arg(args, "script") or _ini_get(ini, "llm", "script_path")
    if script:
        return LlmConfig(
            kind="scripted",
            script_path=script,
            model_name=_arg(args, "model")
            or _ini_get(ini, "llm", "model_name", "scripted"),
        )
    return LlmConfig(
        kind="remote",
        endpoint_url=_arg(args, "endpoint")
        or _ini_get(ini, "llm", "endpoint_url", "https://api.openai.com/v1/chat/completions"),
        model_name=_arg(args, "model") or _ini_get(ini, "llm", "model_name", "gpt-3.5-turbo"),
        api_key_env_var=_arg(args, "api_key_env")
        or _ini_get(ini, "llm", "api_key_env_var", "OPENAI_API_KEY"),
        temperature=float(_ini_get(ini, "llm", "temperature", 0.0)),
    )


def _templates(args):
    from .prompting import DEFAULT_TEMPLATES, load_templates

    if getattr(args, "templates", None):
        return load_templates(args.templates)
    return DEFAULT_TEMPLATES


def cmd_ingest(args) -> int:
    from .corpus import ingest_corpus
    from .embedding import embed_batch
    from .vector_index import VectorIndex, payload_sha256

    import json

    ini = _load_ini(args.config)
    chunking = _chunking_config(args, ini)
    embedder = _embedder_config(args, ini)
    chunks, manifest = ingest_corpus(args.corpus, chunking)
    vectors = embed_batch([c.text for c in chunks], embedder)
    index = VectorIndex(embedder.dim)
    index.add_chunks(chunks, vectors)
    index.save(args.index)
    manifest_path = Path(str(args.index) + ".manifest.json")
    manifest_path.write_text(
        json.dumps(manifest.to_dict(), sort_keys=True, indent=1), encoding="utf-8"
    )
    print(f"chunks: {len(chunks)}, dim: {embedder.dim}")
    print(f"digest: {payload_sha256(args.index)}")
    for warning in manifest.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK


def cmd_repair(args) -> int:
    from .repair_loop import (
        STATUS_ALREADY_COMPILES,
        STATUS_COMPILED,
        STATUS_SEMANTIC_ONLY,
        RepairConfig,
        repair,
    )

    import json

    ini = _load_ini(args.config)
    source_path = Path(args.file)
    if not source_path.is_file():
        raise ConfigError(f"input file not found: {source_path}")
    if args.pipeline == "rails":
        if not args.index:
            raise ConfigError("rails pipeline requires --index")
        if not Path(args.index).is_file():
            raise ConfigError(f"index file not found: {args.index}")

    # Case metadata: a case.json next to the input supplies the declared
    # missing-dependency packages (flags may add more).
    expected_packages: list[str] = list(args.expected_package or [])
    external_symbols: dict[str, str] = {}
    case_id = args.case_id
    meta_path = source_path.parent / "case.json"
    if meta_path.is_file():
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid case.json next to input: {exc}")
        expected_packages.extend(meta.get("expected_external_packages", []))
        case_id = case_id or meta.get("case_id")
        for fqn in meta.get("expected_imports", []):
            if "." in fqn:
                pkg, cls = fqn.rsplit(".", 1)
                if any(pkg == e or pkg.startswith(e + ".") for e in expected_packages):
                    external_symbols[cls] = pkg

    config = RepairConfig(
        pipeline=args.pipeline,
        max_iterations=args.max_iterations,
        top_k=args.top_k,
        index_path=args.index,
        llm=_llm_config(args, ini),
        compiler=_compiler_config(args, ini),
        embedder=_embedder_config(args, ini),
        templates=_templates(args),
        expected_external_packages=tuple(expected_packages),
        external_symbols=external_symbols,
        logs_dir=args.logs,
    )
    source = source_path.read_text(encoding="utf-8")
    case_id = case_id or source_path.stem
    outcome = repair(source, case_id, config)
    fixed_path = source_path.with_name(
        f"{source_path.stem}.fixed{source_path.suffix or '.java'}"
    )
    fixed_path.write_text(outcome.final_code, encoding="utf-8")
    print(f"status: {outcome.status}")
    print(f"fixed file: {fixed_path}")
    if outcome.error:
        print(f"error: {outcome.error}", file=sys.stderr)
    return {
        STATUS_COMPILED: EXIT_OK,
        STATUS_SEMANTIC_ONLY: EXIT_SEMANTIC_ONLY,
        STATUS_ALREADY_COMPILES: EXIT_ALREADY_COMPILES,
    }.get(outcome.status, EXIT_FAILED)


def cmd_bench(args) -> int:
    from .benchmark import load_cases, render_table, run_benchmark
    from .repair_loop import RepairConfig

    ini = _load_ini(args.config)
    pipelines = ["baseline", "rails"] if args.pipelines == "both" else [args.pipelines]
    compiler = _compiler_config(args, ini)
    embedder = _embedder_config(args, ini)
    if "rails" in pipelines:
        if not args.index:
            raise ConfigError("rails pipeline requires --index")
        if not Path(args.index).is_file():
            raise ConfigError(f"index file not found: {args.index}")
    scripts = {"baseline": args.baseline_script, "rails": args.rails_script}
    configs = {}
    for pipeline in pipelines:
        configs[pipeline] = RepairConfig(
            pipeline=pipeline,
            max_iterations=args.max_iterations,
            top_k=args.top_k,
            index_path=args.index if pipeline == "rails" else None,
            llm=_llm_config(args, ini, script_path=scripts[pipeline]),
            compiler=compiler,
            embedder=embedder,
            templates=_templates(args),
        )
    cases = load_cases(args.cases, compiler=compiler)
    report = run_benchmark(
        cases, pipelines, configs, out_dir=args.out, workers=args.workers
    )
    print(render_table(report), end="")
    print(f"report written to {Path(args.out) / 'report.json'}")
    return EXIT_OK


def cmd_report(args) -> int:
    from .benchmark import emit_table, load_report, render_table
    from .radar import emit_radar_svg

    report = load_report(args.input)
    if args.table:
        emit_table(report, args.table)
        print(f"table written to {args.table}")
    if args.radar:
        emit_radar_svg(report, args.radar)
        print(f"radar written to {args.radar}")
    if not args.table and not args.radar:
        print(render_table(report), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ragrepair",
        description=(
            "Retrieval-augmented repair of Java import compilation errors: "
            "build a documentation index, repair single files, and run the "
            "two-pipeline benchmark."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="chunk a corpus, embed it, build and save the index")
    p_ingest.add_argument("--corpus", required=True, help="directory of .txt/.md/.html files")
    p_ingest.add_argument("--index", required=True, help="output path for the index payload")
    p_ingest.add_argument("--provider", choices=["offline", "remote"], default=None,
                          help="embedding provider (default offline)")
    p_ingest.add_argument("--chunk-size", type=int, default=None, help="chunk window size in characters")
    p_ingest.add_argument("--overlap", type=int, default=None, help="chunk overlap in characters")
    p_ingest.add_argument("--dim", type=int, default=None, help="embedding dimension")
    p_ingest.add_argument("--embed-endpoint", default=None, help="remote embeddings endpoint URL")
    p_ingest.add_argument("--embed-model", default=None, help="remote embeddings model name")
    p_ingest.add_argument("--api-key-env", default=None,
                          help="environment variable holding the API key")
    p_ingest.add_argument("--config", default=None, help="INI config file")
    p_ingest.set_defaults(func=cmd_ingest)

    p_repair = sub.add_parser("repair", help="repair one Java file")
    p_repair.add_argument("--file", required=True, help="broken .java file")
    p_repair.add_argument("--pipeline", choices=["baseline", "rails"], required=True)
    p_repair.add_argument("--index", default=None, help="index payload path (rails)")
    p_repair.add_argument("--case-id", default=None, help="case id for scripted replies")
    p_repair.add_argument("--script", default=None, help="scripted-provider JSON file")
    p_repair.add_argument("--endpoint", default=None, help="chat-completions endpoint URL")
    p_repair.add_argument("--model", default=None, help="generation model name")
    p_repair.add_argument("--api-key-env", default=None,
                          help="environment variable holding the API key")
    p_repair.add_argument("--max-iterations", type=int, default=3)
    p_repair.add_argument("--top-k", type=int, default=4)
    p_repair.add_argument("--compiler", default=None,
                          help="compiler command (use 'stub-javac' for the bundled stand-in)")
    p_repair.add_argument("--classpath", action="append", default=None,
                          help="classpath entry (repeatable)")
    p_repair.add_argument("--templates", default=None, help="prompt template override directory")
    p_repair.add_argument("--logs", default=None, help="session log directory")
    p_repair.add_argument("--config", default=None, help="INI config file")
    p_repair.set_defaults(func=cmd_repair)

    p_bench = sub.add_parser("bench", help="run the benchmark over a case directory")
    p_bench.add_argument("--cases", required=True, help="directory of case subdirectories")
    p_bench.add_argument("--pipelines", choices=["both", "baseline", "rails"], default="both")
    p_bench.add_argument("--out", required=True, help="output directory for report/table/radar/logs")
    p_bench.add_argument("--index", default=None, help="index payload path (rails)")
    p_bench.add_argument("--baseline-script", default=None,
                         help="scripted replies for the baseline pipeline")
    p_bench.add_argument("--rails-script", default=None,
                         help="scripted replies for the rails pipeline")
    p_bench.add_argument("--endpoint", default=None, help="chat-completions endpoint URL")
    p_bench.add_argument("--model", default=None, help="generation model name")
    p_bench.add_argument("--api-key-env", default=None,
                         help="environment variable holding the API key")
    p_bench.add_argument("--max-iterations", type=int, default=3)
    p_bench.add_argument("--top-k", type=int, default=4)
    p_bench.add_argument("--compiler", default=None,
                         help="compiler command (use 'stub-javac' for the bundled stand-in)")
    p_bench.add_argument("--classpath", action="append", default=None,
                         help="classpath entry (repeatable)")
    p_bench.add_argument("--templates", default=None, help="prompt template override directory")
    p_bench.add_argument("--workers", type=int, default=1, help="concurrent case workers")
    p_bench.add_argument("--provider", choices=["offline", "remote"], default=None,
                         help="embedding provider for retrieval queries")
    p_bench.add_argument("--dim", type=int, default=None, help="embedding dimension")
    p_bench.add_argument("--embed-endpoint", default=None, help="remote embeddings endpoint URL")
    p_bench.add_argument("--embed-model", default=None, help="remote embeddings model name")
    p_bench.add_argument("--config", default=None, help="INI config file")
    p_bench.set_defaults(func=cmd_bench)

    p_report = sub.add_parser("report", help="regenerate table/radar from a saved report")
    p_report.add_argument("--in", dest="input", required=True, help="report.json path")
    p_report.add_argument("--table", default=None, help="write the text table here")
    p_report.add_argument("--radar", default=None, help="write the radar SVG here")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors; keep that contract.
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _CONFIG_EXITS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _ENVIRONMENT_EXITS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT
    except RagRepairError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENVIRONMENT


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
