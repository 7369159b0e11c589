"""Drive an external Java compiler and parse its diagnostics.

The compiler binary is pluggable through ``CompilerConfig.compiler_path``
(``javac`` by default; the value is split like a shell command, and the token
``stub-javac`` resolves to this package's bundled offline stand-in).  The
compiler runs with its environment pinned to the English locale so the
diagnostic grammar below stays reliable.
"""

from __future__ import annotations

import os
import re
import shlex
import shutil
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import CompileTimeoutError, InputError, ToolchainError

SEVERITY_ERROR = "error"
SEVERITY_WARNING = "warning"

KIND_CANNOT_FIND_SYMBOL = "cannot_find_symbol"
KIND_PACKAGE_DOES_NOT_EXIST = "package_does_not_exist"
KIND_OTHER = "other"

STUB_COMPILER_TOKEN = "stub-javac"


@dataclass(frozen=True)
class Diagnostic:
    """One structured compiler message."""

    file: str
    line: int
    severity: str
    kind: str
    symbol: str | None
    package: str | None
    message: str

    def header_line(self) -> str:
        """Reconstruct the compiler's own `<file>:<line>: <sev>: <msg>` line."""
        return f"{self.file}:{self.line}: {self.severity}: {self.message}"


@dataclass
class CompileResult:
    success: bool
    diagnostics: list[Diagnostic]
    raw_output: str
    duration_ms: float

    @property
    def error_diagnostics(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == SEVERITY_ERROR]


@dataclass(frozen=True)
class CompilerConfig:
    compiler_path: str = "javac"
    classpath_entries: tuple[str, ...] = ()
    work_dir: str | Path | None = None
    timeout: float = 30.0


def stub_compiler_command() -> str:
    """Shell-style command string for the bundled offline compiler."""
    return f"{shlex.quote(sys.executable)} -m ragrepair.stub_javac"


def resolve_compiler(compiler_path: str) -> list[str]:
    """Split the configured compiler command and check its executable exists."""
    if compiler_path == STUB_COMPILER_TOKEN:
        compiler_path = stub_compiler_command()
    argv = shlex.split(compiler_path)
    if not argv:
        raise ToolchainError("compiler_path is empty")
    exe = argv[0]
    if shutil.which(exe) is None and not Path(exe).exists():
        raise ToolchainError(f"compiler executable not found: {exe}")
    return argv


_IDENTIFIER_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")


def compile_source(
    source_text: str, class_name: str, config: CompilerConfig
) -> CompileResult:
    """Write ``class_name``.java into the work dir, compile it, parse stderr.

    Raises a toolchain error when the compiler binary is missing and a timeout
    error (with partial output) when it hangs; an ordinary failed compile is a
    normal result, not an exception.
    """
    if not _IDENTIFIER_RE.fullmatch(class_name):
        raise InputError(f"invalid Java class name: {class_name!r}")
    argv = resolve_compiler(config.compiler_path)
    if config.work_dir is not None:
        work_dir = Path(config.work_dir)
        work_dir.mkdir(parents=True, exist_ok=True)
    else:
        work_dir = Path(tempfile.mkdtemp(prefix="ragrepair-javac-"))
    source_name = f"{class_name}.java"
    source_path = work_dir / source_name
    source_path.write_text(source_text, encoding="utf-8")
    # Run from inside the work dir and hand the compiler a relative file name:
    # diagnostics then read "<class>.java:<line>: ..." independent of where the
    # work dir lives, which keeps logs and reports reproducible across runs.
    cmd = list(argv) + ["-d", str(work_dir.resolve())]
    if config.classpath_entries:
        cmd += [
            "-cp",
            os.pathsep.join(str(Path(e).resolve()) for e in config.classpath_entries),
        ]
    cmd.append(source_name)
    env = dict(os.environ, LC_ALL="en_US.UTF-8", LANG="en_US.UTF-8")
    start = time.perf_counter()
    try:
        proc = subprocess.run(
            cmd,
            capture_output=True,
            text=True,
            timeout=config.timeout,
            env=env,
            cwd=work_dir,
        )
    except subprocess.TimeoutExpired as exc:
        partial = (exc.stderr or b"")
        if isinstance(partial, bytes):
            partial = partial.decode("utf-8", "replace")
        raise CompileTimeoutError(
            f"compiler timed out after {config.timeout}s", partial_output=partial
        ) from exc
    duration_ms = (time.perf_counter() - start) * 1000.0
    raw = proc.stderr
    diagnostics = parse_diagnostics(raw)
    success = proc.returncode == 0
    if success:
        diagnostics = [d for d in diagnostics if d.severity != SEVERITY_ERROR]
    elif not any(d.severity == SEVERITY_ERROR for d in diagnostics):
        first = next((ln for ln in raw.splitlines() if ln.strip()), "compiler exited nonzero")
        diagnostics.append(
            Diagnostic(
                file=source_name,
                line=1,
                severity=SEVERITY_ERROR,
                kind=KIND_OTHER,
                symbol=None,
                package=None,
                message=first,
            )
        )
    return CompileResult(
        success=success,
        diagnostics=diagnostics,
        raw_output=raw,
        duration_ms=duration_ms,
    )


_HEADER_RE = re.compile(r"^(?P<file>.+?):(?P<line>\d+): (?P<sev>error|warning): (?P<msg>.*)$")
_SYMBOL_RE = re.compile(
    r"^\s+symbol:\s+(?:class|interface|enum|record|variable|method|static method)\s+"
    r"(?P<name>[A-Za-z_$][A-Za-z0-9_$.]*)"
)
_PACKAGE_MSG_RE = re.compile(r"^package (?P<pkg>[A-Za-z_$][\w$.]*) does not exist$")


def parse_diagnostics(raw_output: str) -> list[Diagnostic]:
    """Parse compiler output into structured diagnostics.

    Total over strings: unrecognized error messages degrade to kind ``other``
    with their message preserved verbatim, and stray lines are ignored.
    """
    diagnostics: list[Diagnostic] = []
    pending: dict | None = None

    def flush():
        nonlocal pending
        if pending is None:
            return
        kind = pending["kind"]
        if kind == KIND_CANNOT_FIND_SYMBOL and pending["symbol"] is None:
            kind = KIND_OTHER
        diagnostics.append(
            Diagnostic(
                file=pending["file"],
                line=pending["line"],
                severity=pending["severity"],
                kind=kind,
                symbol=pending["symbol"],
                package=pending["package"],
                message=pending["message"],
            )
        )
        pending = None

    for line in raw_output.splitlines():
        header = _HEADER_RE.match(line)
        if header:
            flush()
            msg = header.group("msg")
            pkg_match = _PACKAGE_MSG_RE.match(msg)
            if pkg_match:
                kind, package = KIND_PACKAGE_DOES_NOT_EXIST, pkg_match.group("pkg")
            elif msg.strip() == "cannot find symbol":
                kind, package = KIND_CANNOT_FIND_SYMBOL, None
            else:
                kind, package = KIND_OTHER, None
            pending = {
                "file": header.group("file"),
                "line": int(header.group("line")),
                "severity": header.group("sev"),
                "kind": kind,
                "symbol": None,
                "package": package,
                "message": msg,
            }
            continue
        if pending is not None:
            sym = _SYMBOL_RE.match(line)
            if sym:
                # Qualified symbol text keeps only the simple name.
                pending["symbol"] = sym.group("name").split(".")[-1]
    flush()
    return diagnostics


def is_missing_dependency_only(
    diagnostics: list[Diagnostic],
    expected_external_packages: list[str] | tuple[str, ...],
    *,
    external_symbols: dict[str, str] | None = None,
) -> bool:
    """True iff every error is attributable to a declared-missing external package.

    A ``package_does_not_exist`` error counts when its package is in the
    expected list.  A ``cannot_find_symbol`` error counts only when case
    metadata attributes the symbol to an expected package *and* that package's
    own missing-package error is present too (the compiler emits such symbol
    errors as follow-ons of a failed import, never on their own).
    """
    expected = list(expected_external_packages)
    mapping = dict(external_symbols or {})

    def is_expected(pkg: str) -> bool:
        return any(pkg == e or pkg.startswith(e + ".") for e in expected)

    errors = [d for d in diagnostics if d.severity == SEVERITY_ERROR]
    missing_pkgs = {
        d.package
        for d in errors
        if d.kind == KIND_PACKAGE_DOES_NOT_EXIST and d.package and is_expected(d.package)
    }

    def accompanied(pkg: str) -> bool:
        return any(
            m == pkg or m.startswith(pkg + ".") or pkg.startswith(m + ".")
            for m in missing_pkgs
        )

    for diag in errors:
        if (
            diag.kind == KIND_PACKAGE_DOES_NOT_EXIST
            and diag.package
            and is_expected(diag.package)
        ):
            continue
        if diag.kind == KIND_CANNOT_FIND_SYMBOL and diag.symbol:
            attributed = mapping.get(diag.symbol)
            if attributed and is_expected(attributed) and accompanied(attributed):
                continue
        return False
    return True


def mask_comments_and_strings(source: str) -> str:
    """Blank out comments and string/char literals, preserving length and newlines."""
    res = list(source)
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c == "/" and i + 1 < n and source[i + 1] == "/":
            j = source.find("\n", i)
            j = n if j < 0 else j
            for k in range(i, j):
                res[k] = " "
            i = j
        elif c == "/" and i + 1 < n and source[i + 1] == "*":
            j = source.find("*/", i + 2)
            end = n if j < 0 else j + 2
            for k in range(i, end):
                if res[k] != "\n":
                    res[k] = " "
            i = end
        elif c in ('"', "'"):
            quote = c
            j = i + 1
            while j < n and source[j] != quote:
                if source[j] == "\\":
                    j += 1
                j += 1
            end = min(j + 1, n)
            for k in range(i, end):
                if res[k] != "\n":
                    res[k] = " "
            i = end
        else:
            i += 1
    return "".join(res)


_PUBLIC_CLASS_RE = re.compile(
    r"\bpublic\s+(?:final\s+|abstract\s+|strictfp\s+)*class\s+([A-Za-z_$][A-Za-z0-9_$]*)"
)
_ANY_CLASS_RE = re.compile(r"\bclass\s+([A-Za-z_$][A-Za-z0-9_$]*)")


def extract_class_name(source: str) -> str:
    """Pull the public class name out of a source file (comments/strings skipped)."""
    masked = mask_comments_and_strings(source)
    match = _PUBLIC_CLASS_RE.search(masked) or _ANY_CLASS_RE.search(masked)
    if not match:
        raise InputError("no class declaration found in source")
    return match.group(1)


def compiler_version(config: CompilerConfig) -> str:
    """Best-effort `<compiler> -version` banner for environment records."""
    try:
        argv = resolve_compiler(config.compiler_path)
    except ToolchainError:
        return "unavailable"
    try:
        proc = subprocess.run(
            argv + ["-version"], capture_output=True, text=True, timeout=30
        )
    except (OSError, subprocess.TimeoutExpired):
        return "unavailable"
    banner = (proc.stdout or proc.stderr).strip().splitlines()
    return banner[0] if banner else "unknown"
