"""Offline stand-in for ``javac`` focused on import resolution.

Checks every capitalized type name used in a source file against java.lang,
the file's own declarations, its import statements, and a built-in table of
common JDK classes.  Imports from outside the JDK namespaces must be provided
by the classpath (directories or jars); otherwise the import line fails with
``package ... does not exist`` and each use site fails with ``cannot find
symbol``, mirroring the real compiler's behavior and message format.

Accepts the ``-d``/``-cp`` invocation shape used by this package, writes a
placeholder ``.class`` file on success, prints diagnostics to stderr, and
exits 1 when any error was reported.  It is not a Java compiler: no syntax or
type checking happens beyond name resolution.
"""

from __future__ import annotations

import os
import re
import sys
import zipfile
from pathlib import Path

from .java_compiler import mask_comments_and_strings

VERSION_BANNER = "stubjavac 1.0 (offline javac-format import checker)"

JAVA_LANG = {
    "AutoCloseable", "Boolean", "Byte", "CharSequence", "Character", "Class",
    "Cloneable", "Comparable", "Deprecated", "Double", "Enum", "Error",
    "Exception", "Float", "FunctionalInterface", "IllegalArgumentException",
    "IllegalStateException", "Integer", "InterruptedException", "Iterable",
    "Long", "Math", "NullPointerException", "Number", "Object", "Override",
    "Process", "ProcessBuilder", "Runnable", "Runtime", "RuntimeException",
    "SafeVarargs", "Short", "StackTraceElement", "StrictMath", "String",
    "StringBuffer", "StringBuilder", "SuppressWarnings", "System", "Thread",
    "ThreadLocal", "Throwable", "UnsupportedOperationException", "Void",
    "ArithmeticException", "ArrayIndexOutOfBoundsException", "ClassCastException",
    "IndexOutOfBoundsException", "NumberFormatException", "OutOfMemoryError",
    "StackOverflowError",
}

JDK_CLASSES = {
    # java.util
    "ArrayDeque": "java.util", "ArrayList": "java.util", "Arrays": "java.util",
    "Calendar": "java.util", "Collection": "java.util", "Collections": "java.util",
    "Comparator": "java.util", "Date": "java.util", "Deque": "java.util",
    "GregorianCalendar": "java.util", "HashMap": "java.util", "HashSet": "java.util",
    "Iterator": "java.util", "LinkedHashMap": "java.util", "LinkedList": "java.util",
    "List": "java.util", "Locale": "java.util", "Map": "java.util",
    "Objects": "java.util", "Optional": "java.util", "Properties": "java.util",
    "Queue": "java.util", "Random": "java.util", "Scanner": "java.util",
    "Set": "java.util", "Stack": "java.util", "StringJoiner": "java.util",
    "StringTokenizer": "java.util", "Timer": "java.util", "TimerTask": "java.util",
    "TreeMap": "java.util", "TreeSet": "java.util", "UUID": "java.util",
    "Vector": "java.util",
    # java.util.*
    "CompletableFuture": "java.util.concurrent", "ConcurrentHashMap": "java.util.concurrent",
    "ExecutorService": "java.util.concurrent", "Executors": "java.util.concurrent",
    "TimeUnit": "java.util.concurrent",
    "Consumer": "java.util.function", "Function": "java.util.function",
    "Predicate": "java.util.function", "Supplier": "java.util.function",
    "Matcher": "java.util.regex", "Pattern": "java.util.regex",
    "Collectors": "java.util.stream", "IntStream": "java.util.stream",
    "Stream": "java.util.stream",
    # java.io
    "BufferedReader": "java.io", "BufferedWriter": "java.io", "File": "java.io",
    "FileInputStream": "java.io", "FileNotFoundException": "java.io",
    "FileOutputStream": "java.io", "FileReader": "java.io", "FileWriter": "java.io",
    "IOException": "java.io", "InputStream": "java.io", "InputStreamReader": "java.io",
    "ObjectInputStream": "java.io", "ObjectOutputStream": "java.io",
    "OutputStream": "java.io", "OutputStreamWriter": "java.io", "PrintStream": "java.io",
    "PrintWriter": "java.io", "Reader": "java.io", "Serializable": "java.io",
    "Writer": "java.io",
    # java.nio
    "DirectoryStream": "java.nio.file", "FileSystems": "java.nio.file",
    "Files": "java.nio.file", "Path": "java.nio.file", "Paths": "java.nio.file",
    "StandardOpenOption": "java.nio.file",
    "Charset": "java.nio.charset", "StandardCharsets": "java.nio.charset",
    # java.time
    "Clock": "java.time", "DayOfWeek": "java.time", "Duration": "java.time",
    "Instant": "java.time", "LocalDate": "java.time", "LocalDateTime": "java.time",
    "LocalTime": "java.time", "Month": "java.time", "Period": "java.time",
    "Year": "java.time", "ZoneId": "java.time", "ZonedDateTime": "java.time",
    "DateTimeFormatter": "java.time.format",
    # java.net
    "HttpURLConnection": "java.net", "InetAddress": "java.net",
    "MalformedURLException": "java.net", "ServerSocket": "java.net",
    "Socket": "java.net", "URI": "java.net", "URL": "java.net",
    "URLConnection": "java.net",
    # java.text
    "DateFormat": "java.text", "DecimalFormat": "java.text",
    "NumberFormat": "java.text", "ParseException": "java.text",
    "SimpleDateFormat": "java.text",
    # java.math
    "BigDecimal": "java.math", "BigInteger": "java.math",
    # javax.swing
    "ImageIcon": "javax.swing", "JButton": "javax.swing", "JCheckBox": "javax.swing",
    "JComponent": "javax.swing", "JDialog": "javax.swing", "JFrame": "javax.swing",
    "JLabel": "javax.swing", "JList": "javax.swing", "JMenu": "javax.swing",
    "JMenuBar": "javax.swing", "JMenuItem": "javax.swing", "JOptionPane": "javax.swing",
    "JPanel": "javax.swing", "JRadioButton": "javax.swing", "JScrollPane": "javax.swing",
    "JTable": "javax.swing", "JTextArea": "javax.swing", "JTextField": "javax.swing",
    "SwingUtilities": "javax.swing",
    # java.awt
    "BorderLayout": "java.awt", "Color": "java.awt", "Dimension": "java.awt",
    "FlowLayout": "java.awt", "Font": "java.awt", "Graphics": "java.awt",
    "Graphics2D": "java.awt", "GridLayout": "java.awt",
    "ActionEvent": "java.awt.event", "ActionListener": "java.awt.event",
    "WindowAdapter": "java.awt.event", "WindowEvent": "java.awt.event",
    # java.sql
    "Connection": "java.sql", "DriverManager": "java.sql",
    "PreparedStatement": "java.sql", "ResultSet": "java.sql",
    "SQLException": "java.sql", "Statement": "java.sql",
}

JDK_PACKAGES = {
    "java.lang", "java.util", "java.util.concurrent", "java.util.function",
    "java.util.regex", "java.util.stream", "java.io", "java.nio",
    "java.nio.file", "java.nio.charset", "java.time", "java.time.format",
    "java.net", "java.text", "java.math", "javax.swing", "javax.swing.event",
    "java.awt", "java.awt.event", "java.sql",
}

_IMPORT_RE = re.compile(
    r"^\s*import\s+(?P<static>static\s+)?(?P<name>[A-Za-z_$][\w$.]*?)(?P<star>\.\*)?\s*;",
)
_DECL_RE = re.compile(r"\b(?:class|interface|enum|record)\s+([A-Za-z_$][\w$]*)")
_TYPE_USE_RE = re.compile(r"[A-Za-z_$][\w$]*")


def _classpath_provides(entries: list[str], package: str) -> bool:
    rel = package.replace(".", "/")
    for entry in entries:
        path = Path(entry)
        if path.is_dir():
            if (path / rel).is_dir():
                return True
        elif path.is_file() and zipfile.is_zipfile(path):
            prefix = rel + "/"
            try:
                with zipfile.ZipFile(path) as zf:
                    if any(name.startswith(prefix) for name in zf.namelist()):
                        return True
            except OSError:
                continue
    return False


def _classpath_has_class(entries: list[str], package: str, cls: str) -> bool:
    rel = f"{package.replace('.', '/')}/{cls}.class"
    for entry in entries:
        path = Path(entry)
        if path.is_dir():
            if (path / rel).is_file():
                return True
        elif path.is_file() and zipfile.is_zipfile(path):
            try:
                with zipfile.ZipFile(path) as zf:
                    if rel in zf.namelist():
                        return True
            except OSError:
                continue
    return False


class _Error:
    def __init__(self, line: int, col: int, message: str, symbol_kind: str | None,
                 symbol: str | None, location: str | None):
        self.line = line
        self.col = col
        self.message = message
        self.symbol_kind = symbol_kind
        self.symbol = symbol
        self.location = location


def check_source(source: str, file_label: str, classpath: list[str]) -> tuple[list[str], int]:
    """Return (stderr lines, error count) for one source file."""
    masked = mask_comments_and_strings(source)
    raw_lines = source.splitlines()
    masked_lines = masked.splitlines()

    declared = set(_DECL_RE.findall(masked))
    enclosing = next(iter(_DECL_RE.findall(masked)), None) or Path(file_label).stem
    location = f"class {enclosing}"

    errors: list[_Error] = []
    resolved: set[str] = set()
    star_jdk: set[str] = set()
    star_external: set[str] = set()
    import_line_nos: set[int] = set()

    for lineno, mline in enumerate(masked_lines, start=1):
        match = _IMPORT_RE.match(mline)
        if not match:
            continue
        import_line_nos.add(lineno)
        name = match.group("name")
        is_star = match.group("star") is not None
        if match.group("static") and not is_star:
            # `import static p.C.member;` binds through class p.C.
            name = name.rsplit(".", 1)[0] if "." in name else name
        if is_star:
            pkg = name
            if pkg in JDK_PACKAGES:
                star_jdk.add(pkg)
            elif _classpath_provides(classpath, pkg):
                star_external.add(pkg)
            else:
                dot = mline.rfind(".")
                errors.append(_Error(lineno, dot + 1 if dot >= 0 else 1,
                                     f"package {pkg} does not exist", None, None, None))
            continue
        if "." not in name:
            continue
        pkg, cls = name.rsplit(".", 1)
        if pkg in JDK_PACKAGES:
            if pkg == "java.lang" or JDK_CLASSES.get(cls) == pkg:
                resolved.add(cls)
            else:
                col = mline.find(cls, len("import")) + 1
                errors.append(_Error(lineno, max(col, 1), "cannot find symbol",
                                     "class", cls, f"package {pkg}"))
        elif _classpath_provides(classpath, pkg):
            if _classpath_has_class(classpath, pkg, cls):
                resolved.add(cls)
            else:
                col = mline.find(cls, len("import")) + 1
                errors.append(_Error(lineno, max(col, 1), "cannot find symbol",
                                     "class", cls, f"package {pkg}"))
        else:
            dot = mline.rfind(".")
            errors.append(_Error(lineno, dot + 1 if dot >= 0 else 1,
                                 f"package {pkg} does not exist", None, None, None))

    for lineno, mline in enumerate(masked_lines, start=1):
        if lineno in import_line_nos:
            continue
        stripped = mline.lstrip()
        if stripped.startswith("package ") or stripped.startswith("import "):
            continue
        for match in _TYPE_USE_RE.finditer(mline):
            token = match.group(0)
            if not token[0].isupper() or len(token) == 1:
                continue
            before = mline[: match.start()].rstrip()
            if before.endswith("."):
                continue  # member access, not a type head
            if token in declared or token in JAVA_LANG or token in resolved:
                continue
            pkg = JDK_CLASSES.get(token)
            if pkg is not None and pkg in star_jdk:
                continue
            if any(_classpath_has_class(classpath, p, token) for p in star_external):
                continue
            after = mline[match.end():].lstrip()
            if re.search(r"\bnew$", before):
                symbol_kind = "class"
            elif after.startswith("."):
                symbol_kind = "variable"
            else:
                symbol_kind = "class"
            errors.append(_Error(lineno, match.start() + 1, "cannot find symbol",
                                 symbol_kind, token, location))

    errors.sort(key=lambda e: (e.line, e.col))
    out: list[str] = []
    for err in errors:
        out.append(f"{file_label}:{err.line}: error: {err.message}")
        src_line = raw_lines[err.line - 1] if 0 < err.line <= len(raw_lines) else ""
        out.append(src_line)
        out.append(" " * (err.col - 1) + "^")
        if err.symbol is not None:
            out.append(f"  symbol:   {err.symbol_kind} {err.symbol}")
            out.append(f"  location: {err.location}")
    if errors:
        out.append(f"{len(errors)} error" + ("s" if len(errors) != 1 else ""))
    return out, len(errors)


def main(argv: list[str] | None = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    out_dir: Path | None = None
    classpath: list[str] = []
    sources: list[Path] = []
    i = 0
    while i < len(args):
        arg = args[i]
        if arg == "-version" or arg == "--version":
            print(VERSION_BANNER)
            return 0
        if arg == "-d":
            out_dir = Path(args[i + 1])
            i += 2
        elif arg in ("-cp", "-classpath", "--class-path"):
            classpath = [e for e in args[i + 1].split(os.pathsep) if e]
            i += 2
        elif arg.startswith("-"):
            i += 1  # unsupported javac flag: accept and ignore
        else:
            sources.append(Path(arg))
            i += 1
    if not sources:
        print("error: no source files", file=sys.stderr)
        return 2
    total_errors = 0
    for src in sources:
        try:
            text = src.read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot read {src}: {exc}", file=sys.stderr)
            return 2
        lines, n_errors = check_source(text, str(src), classpath)
        for line in lines:
            print(line, file=sys.stderr)
        total_errors += n_errors
        if n_errors == 0 and out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            masked = mask_comments_and_strings(text)
            decl = _DECL_RE.search(masked)
            class_name = decl.group(1) if decl else src.stem
            (out_dir / f"{class_name}.class").write_bytes(b"\xca\xfe\xba\xbe")
    return 1 if total_errors else 0


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
