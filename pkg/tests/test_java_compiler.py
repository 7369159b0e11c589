"""Diagnostics parser tests (frozen compiler-format fixtures) and driver tests."""

from __future__ import annotations

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ragrepair.errors import CompileTimeoutError, InputError, ToolchainError
from ragrepair.java_compiler import (
    KIND_CANNOT_FIND_SYMBOL,
    KIND_OTHER,
    KIND_PACKAGE_DOES_NOT_EXIST,
    CompilerConfig,
    Diagnostic,
    compile_source,
    compiler_version,
    extract_class_name,
    is_missing_dependency_only,
    mask_comments_and_strings,
    parse_diagnostics,
    resolve_compiler,
)

from conftest import DATA_DIR


def fixture(name: str) -> str:
    return (DATA_DIR / name).read_text(encoding="utf-8")


# ===================================================================
# parse_diagnostics on frozen fixtures
# ===================================================================


def test_parse_empty_output():
    assert parse_diagnostics("") == []


def test_parse_missing_jdk_class_fixture():
    diags = parse_diagnostics(fixture("javac_missing_symbol.txt"))
    assert len(diags) == 1
    d = diags[0]
    assert (d.kind, d.symbol, d.line, d.severity) == (
        KIND_CANNOT_FIND_SYMBOL,
        "ArrayList",
        3,
        "error",
    )
    assert d.file == "Main.java"


def test_parse_missing_package_fixture():
    diags = parse_diagnostics(fixture("javac_missing_package.txt"))
    assert [(d.kind, d.line) for d in diags] == [
        (KIND_PACKAGE_DOES_NOT_EXIST, 1),
        (KIND_CANNOT_FIND_SYMBOL, 6),
    ]
    assert diags[0].package == "org.apache.commons.io"
    assert diags[1].symbol == "FileUtils"


def test_parse_mixed_errors_fixture():
    diags = parse_diagnostics(fixture("javac_mixed_errors.txt"))
    assert [(d.kind, d.severity, d.line) for d in diags] == [
        (KIND_PACKAGE_DOES_NOT_EXIST, "error", 1),
        (KIND_OTHER, "warning", 2),
        (KIND_CANNOT_FIND_SYMBOL, "error", 9),
    ]
    assert diags[0].package == "com.google.gson"
    assert diags[2].symbol == "StringUtils"
    assert "[deprecation]" in diags[1].message


def test_parse_two_distinct_packages_in_file_order():
    diags = parse_diagnostics(fixture("javac_two_packages.txt"))
    assert [d.kind for d in diags] == [KIND_PACKAGE_DOES_NOT_EXIST] * 2
    assert [d.package for d in diags] == ["org.apache.commons.io", "com.google.gson"]


def test_unrecognized_error_becomes_other_with_message_preserved():
    raw = "Weird.java:8: error: ';' expected\n        int x = 1\n              ^\n1 error\n"
    diags = parse_diagnostics(raw)
    assert len(diags) == 1
    assert diags[0].kind == KIND_OTHER
    assert diags[0].message == "';' expected"


@pytest.mark.parametrize(
    "name",
    [
        "javac_missing_symbol.txt",
        "javac_missing_package.txt",
        "javac_mixed_errors.txt",
        "javac_two_packages.txt",
    ],
)
def test_parse_is_lossless_over_header_lines(name):
    raw = fixture(name)
    diags = parse_diagnostics(raw)
    header_re = re.compile(r"^.+?:\d+: (?:error|warning): .*$")
    headers = [ln for ln in raw.splitlines() if header_re.match(ln)]
    assert [d.header_line() for d in diags] == headers


@settings(max_examples=80, deadline=None)
@given(st.text(max_size=400))
def test_parse_is_total_over_arbitrary_text(blob):
    diags = parse_diagnostics(blob)
    for d in diags:
        if d.kind == KIND_CANNOT_FIND_SYMBOL:
            assert d.symbol
        if d.kind == KIND_PACKAGE_DOES_NOT_EXIST:
            assert d.package


def test_symbol_without_continuation_degrades_to_other():
    raw = "Main.java:3: error: cannot find symbol\n1 error\n"
    diags = parse_diagnostics(raw)
    assert diags[0].kind == KIND_OTHER
    assert diags[0].message == "cannot find symbol"


# ===================================================================
# is_missing_dependency_only
# ===================================================================


def pkg_diag(pkg, line=1):
    return Diagnostic("Main.java", line, "error", KIND_PACKAGE_DOES_NOT_EXIST,
                      None, pkg, f"package {pkg} does not exist")


def sym_diag(symbol, line=5):
    return Diagnostic("Main.java", line, "error", KIND_CANNOT_FIND_SYMBOL,
                      symbol, None, "cannot find symbol")


def other_diag(line=2):
    return Diagnostic("Main.java", line, "error", KIND_OTHER, None, None, "';' expected")


def test_single_expected_package_is_dependency_only():
    assert is_missing_dependency_only([pkg_diag("org.apache.commons.io")],
                                      ["org.apache.commons.io"])


def test_unexpected_package_is_not():
    assert not is_missing_dependency_only([pkg_diag("javax.fx")],
                                          ["javafx.scene.control"])


def test_extra_syntax_error_breaks_it():
    diags = [pkg_diag("org.apache.commons.io"), other_diag()]
    assert not is_missing_dependency_only(diags, ["org.apache.commons.io"])


def test_empty_diagnostics_vacuously_true():
    assert is_missing_dependency_only([], ["org.apache.commons.io"])


def test_follow_on_symbol_excused_when_package_error_present():
    diags = [pkg_diag("org.apache.commons.io"), sym_diag("FileUtils")]
    assert is_missing_dependency_only(
        diags,
        ["org.apache.commons.io"],
        external_symbols={"FileUtils": "org.apache.commons.io"},
    )


def test_symbol_alone_not_excused_without_package_error():
    assert not is_missing_dependency_only(
        [sym_diag("FileUtils")],
        ["org.apache.commons.io"],
        external_symbols={"FileUtils": "org.apache.commons.io"},
    )


def test_unattributed_symbol_not_excused():
    diags = [pkg_diag("org.apache.commons.io"), sym_diag("Mystery")]
    assert not is_missing_dependency_only(
        diags,
        ["org.apache.commons.io"],
        external_symbols={"FileUtils": "org.apache.commons.io"},
    )


def test_warnings_are_ignored():
    warn = Diagnostic("Main.java", 2, "warning", KIND_OTHER, None, None, "[deprecation] x")
    assert is_missing_dependency_only(
        [pkg_diag("com.google.gson"), warn], ["com.google.gson"]
    )


def test_subpackage_of_expected_counts():
    assert is_missing_dependency_only(
        [pkg_diag("org.apache.commons.io.filefilter")], ["org.apache.commons.io"]
    )


# ===================================================================
# mask / class-name extraction
# ===================================================================


def test_mask_preserves_length_and_newlines():
    src = 'class A { // hidden ArrayList\n  String s = "new JFrame"; /* Gson */ }\n'
    masked = mask_comments_and_strings(src)
    assert len(masked) == len(src)
    assert masked.count("\n") == src.count("\n")
    assert "hidden" not in masked
    assert "JFrame" not in masked
    assert "Gson" not in masked
    assert "class A" in masked


def test_extract_class_name_prefers_public_class():
    src = "class Helper {}\npublic final class Main { }\n"
    assert extract_class_name(src) == "Main"


def test_extract_class_name_ignores_comments_and_strings():
    src = '// public class Wrong\nString s = "public class AlsoWrong";\nclass Actual {}\n'
    assert extract_class_name(src) == "Actual"


def test_extract_class_name_missing_is_input_error():
    with pytest.raises(InputError):
        extract_class_name("int x = 4;")


# ===================================================================
# compile_source against the stub binary
# ===================================================================

VALID = "public class A {\n    public static void main(String[] args) {}\n}\n"
MISSING_IMPORT = (
    "public class A {\n"
    "    public static void main(String[] args) {\n"
    "        ArrayList<String> xs = new ArrayList<>();\n"
    "        System.out.println(xs);\n"
    "    }\n"
    "}\n"
)
MISSING_PACKAGE = (
    "import org.apache.commons.io.FileUtils;\n"
    "public class A {\n"
    "    public static void main(String[] args) throws Exception {\n"
    "        System.out.println(FileUtils.readFileToString(new java.io.File(\"x\"), \"UTF-8\"));\n"
    "    }\n"
    "}\n"
)


def test_compile_valid_source(stub_compiler_config, tmp_path):
    import dataclasses

    config = dataclasses.replace(stub_compiler_config, work_dir=tmp_path / "w")
    result = compile_source(VALID, "A", config)
    assert result.success
    assert result.error_diagnostics == []
    assert (tmp_path / "w" / "A.java").read_text() == VALID
    assert result.duration_ms > 0


def test_compile_missing_import(stub_compiler_config, tmp_path):
    import dataclasses

    config = dataclasses.replace(stub_compiler_config, work_dir=tmp_path / "w")
    result = compile_source(MISSING_IMPORT, "A", config)
    assert not result.success
    kinds = {d.kind for d in result.error_diagnostics}
    assert kinds == {KIND_CANNOT_FIND_SYMBOL}
    assert {d.symbol for d in result.error_diagnostics} == {"ArrayList"}
    assert result.error_diagnostics[0].line == 3


def test_compile_missing_package(stub_compiler_config, tmp_path):
    import dataclasses

    config = dataclasses.replace(stub_compiler_config, work_dir=tmp_path / "w")
    result = compile_source(MISSING_PACKAGE, "A", config)
    assert not result.success
    kinds = [d.kind for d in result.error_diagnostics]
    assert KIND_PACKAGE_DOES_NOT_EXIST in kinds
    pkg = next(d for d in result.error_diagnostics if d.kind == KIND_PACKAGE_DOES_NOT_EXIST)
    assert pkg.package == "org.apache.commons.io"


def test_compile_invalid_class_name(stub_compiler_config):
    with pytest.raises(InputError):
        compile_source(VALID, "Not A Name", stub_compiler_config)


def test_missing_compiler_is_toolchain_error(tmp_path):
    config = CompilerConfig(compiler_path="definitely-not-a-compiler-xyz", work_dir=tmp_path)
    with pytest.raises(ToolchainError):
        compile_source(VALID, "A", config)
    with pytest.raises(ToolchainError):
        resolve_compiler("definitely-not-a-compiler-xyz")


def test_compile_timeout(tmp_path):
    import shlex
    import sys

    slow = tmp_path / "slow.py"
    slow.write_text("import time\ntime.sleep(20)\n")
    config = CompilerConfig(
        compiler_path=f"{shlex.quote(sys.executable)} {shlex.quote(str(slow))}",
        work_dir=tmp_path / "w",
        timeout=0.3,
    )
    with pytest.raises(CompileTimeoutError):
        compile_source(VALID, "A", config)


def test_nonzero_exit_with_unparseable_output_yields_other(tmp_path):
    import shlex
    import sys

    bad = tmp_path / "bad.py"
    bad.write_text("import sys\nsys.stderr.write('boom\\n')\nsys.exit(1)\n")
    config = CompilerConfig(
        compiler_path=f"{shlex.quote(sys.executable)} {shlex.quote(str(bad))}",
        work_dir=tmp_path / "w",
    )
    result = compile_source(VALID, "A", config)
    assert not result.success
    assert result.error_diagnostics[0].kind == KIND_OTHER
    assert "boom" in result.error_diagnostics[0].message


def test_concurrent_compiles_use_distinct_work_dirs(stub_compiler_config, tmp_path):
    import dataclasses
    from concurrent.futures import ThreadPoolExecutor

    def compile_in(dirname):
        config = dataclasses.replace(stub_compiler_config, work_dir=tmp_path / dirname)
        return compile_source(VALID, "A", config)

    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(compile_in, [f"d{i}" for i in range(8)]))
    assert all(r.success for r in results)


def test_compiler_version_banner(stub_compiler_config):
    banner = compiler_version(stub_compiler_config)
    assert "stubjavac" in banner


def test_compiler_version_unavailable():
    assert compiler_version(CompilerConfig(compiler_path="nope-nope-nope")) == "unavailable"


def test_stub_token_resolves():
    argv = resolve_compiler("stub-javac")
    assert argv[-2:] == ["-m", "ragrepair.stub_javac"]
