"""Language identification, file taxonomies, and the lexical complexity score.

The complexity score counts control-flow statements and logical operators
with differentiated per-language regex rules:

    score = 1 + n_cf + n_op / 2

Counting runs over text with comments and string literals masked out, so a
keyword inside a docstring or a ``//`` comment never inflates the counts.
The score is held as an exact Decimal (halves only), never a binary float.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from decimal import Decimal
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .records import AppDomain, CodeSample, DataError, FileFunction, LanguageId, TechStack

_EXTENSION_MAP: dict[str, LanguageId] = {
    ".py": LanguageId.PYTHON,
    ".pyw": LanguageId.PYTHON,
    ".java": LanguageId.JAVA,
    ".cpp": LanguageId.CPP,
    ".cc": LanguageId.CPP,
    ".cxx": LanguageId.CPP,
    ".hpp": LanguageId.CPP,
    ".hh": LanguageId.CPP,
    ".c": LanguageId.C,
    ".h": LanguageId.C,
    ".cs": LanguageId.CSHARP,
    ".js": LanguageId.JAVASCRIPT,
    ".mjs": LanguageId.JAVASCRIPT,
    ".cjs": LanguageId.JAVASCRIPT,
    ".jsx": LanguageId.JAVASCRIPT,
    ".ts": LanguageId.TYPESCRIPT,
    ".tsx": LanguageId.TYPESCRIPT,
    ".rb": LanguageId.RUBY,
    ".php": LanguageId.PHP,
    ".go": LanguageId.GO,
    ".rs": LanguageId.RUST,
    ".sh": LanguageId.SHELL,
    ".bash": LanguageId.SHELL,
    ".zsh": LanguageId.SHELL,
    ".ksh": LanguageId.SHELL,
    ".scala": LanguageId.SCALA,
    ".sc": LanguageId.SCALA,
    ".html": LanguageId.HTML,
    ".htm": LanguageId.HTML,
    ".css": LanguageId.CSS,
    ".scss": LanguageId.CSS,
    ".sql": LanguageId.SQL,
    ".md": LanguageId.MARKDOWN,
    ".markdown": LanguageId.MARKDOWN,
    ".yml": LanguageId.YAML,
    ".yaml": LanguageId.YAML,
    ".ipynb": LanguageId.JUPYTER,
}

_INTERPRETER_MAP = {
    "python": LanguageId.PYTHON,
    "node": LanguageId.JAVASCRIPT,
    "nodejs": LanguageId.JAVASCRIPT,
    "ruby": LanguageId.RUBY,
    "php": LanguageId.PHP,
    "sh": LanguageId.SHELL,
    "bash": LanguageId.SHELL,
    "zsh": LanguageId.SHELL,
    "ksh": LanguageId.SHELL,
    "dash": LanguageId.SHELL,
}


def detect_language(path: str, content: str | None = None) -> LanguageId:
    """Map a file path to a language id; total and deterministic.

    Content is consulted only for extensionless files with a shebang line.
    """
    if not path:
        raise DataError("path must be non-empty")
    ext = Path(path).suffix.lower()
    if ext:
        return _EXTENSION_MAP.get(ext, LanguageId.OTHER)
    if content:
        first = content.split("\n", 1)[0]
        if first.startswith("#!"):
            tokens = [t for t in re.split(r"[/\s]+", first[2:].strip()) if t]
            if tokens:
                interpreter = re.sub(r"[0-9.]+$", "", tokens[-1])
                return _INTERPRETER_MAP.get(interpreter, LanguageId.OTHER)
    return LanguageId.OTHER


# ---------------------------------------------------------------------------
# Comment / string masking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LangSyntax:
    """Lexical syntax needed to mask comments and string literals."""

    line_comments: tuple[str, ...] = ()
    block_comments: tuple[tuple[str, str], ...] = ()
    string_delims: tuple[str, ...] = ()
    # delimiters whose contents take no backslash escapes (shell single quotes)
    raw_delims: tuple[str, ...] = ()
    # Rust: an apostrophe opens a char literal only when it closes within a
    # couple of characters; otherwise it is a lifetime marker.
    char_literal_quote: bool = False


_C_LIKE = LangSyntax(line_comments=("//",), block_comments=(("/*", "*/"),), string_delims=('"', "'"))

_SYNTAX: dict[LanguageId, LangSyntax] = {
    LanguageId.PYTHON: LangSyntax(
        line_comments=("#",), string_delims=('"""', "'''", '"', "'")
    ),
    LanguageId.JUPYTER: LangSyntax(
        line_comments=("#",), string_delims=('"""', "'''", '"', "'")
    ),
    LanguageId.C: _C_LIKE,
    LanguageId.CPP: _C_LIKE,
    LanguageId.JAVA: _C_LIKE,
    LanguageId.CSHARP: _C_LIKE,
    LanguageId.SCALA: _C_LIKE,
    LanguageId.JAVASCRIPT: LangSyntax(
        line_comments=("//",), block_comments=(("/*", "*/"),), string_delims=('"', "'", "`")
    ),
    LanguageId.TYPESCRIPT: LangSyntax(
        line_comments=("//",), block_comments=(("/*", "*/"),), string_delims=('"', "'", "`")
    ),
    LanguageId.GO: LangSyntax(
        line_comments=("//",), block_comments=(("/*", "*/"),), string_delims=('"', "'", "`"),
        raw_delims=("`",),
    ),
    LanguageId.RUST: LangSyntax(
        line_comments=("//",), block_comments=(("/*", "*/"),), string_delims=('"',),
        char_literal_quote=True,
    ),
    LanguageId.RUBY: LangSyntax(
        line_comments=("#",), block_comments=(("=begin", "=end"),), string_delims=('"', "'")
    ),
    LanguageId.PHP: LangSyntax(
        line_comments=("//", "#"), block_comments=(("/*", "*/"),), string_delims=('"', "'")
    ),
    LanguageId.SHELL: LangSyntax(
        line_comments=("#",), string_delims=('"', "'"), raw_delims=("'",)
    ),
    LanguageId.SQL: LangSyntax(
        line_comments=("--",), block_comments=(("/*", "*/"),), string_delims=("'",), raw_delims=("'",)
    ),
    LanguageId.HTML: LangSyntax(block_comments=(("<!--", "-->"),), string_delims=('"', "'")),
    LanguageId.CSS: LangSyntax(block_comments=(("/*", "*/"),), string_delims=('"', "'")),
    LanguageId.MARKDOWN: LangSyntax(block_comments=(("<!--", "-->"),)),
    LanguageId.YAML: LangSyntax(line_comments=("#",), string_delims=('"', "'")),
}

_GENERIC_SYNTAX = LangSyntax(
    line_comments=("//", "#"), block_comments=(("/*", "*/"),), string_delims=('"', "'")
)

_RUST_CHAR_LITERAL = re.compile(r"'(\\.|[^'\\\n])'")


def syntax_for(language: LanguageId) -> LangSyntax:
    return _SYNTAX.get(language, _GENERIC_SYNTAX)


def mask_literals(text: str, language: LanguageId) -> tuple[str, int]:
    """Blank out comments and string literals, preserving newlines.

    Returns the masked text (same length, masked chars become spaces) and the
    number of characters that sat inside comments.
    """
    syn = syntax_for(language)
    out = list(text)
    comment_chars = 0
    i, n = 0, len(text)

    def blank(start: int, stop: int) -> None:
        for k in range(start, min(stop, n)):
            if out[k] != "\n":
                out[k] = " "

    while i < n:
        ch = text[i]
        matched = False
        for opener, closer in syn.block_comments:
            if text.startswith(opener, i):
                end = text.find(closer, i + len(opener))
                stop = n if end < 0 else end + len(closer)
                blank(i, stop)
                comment_chars += stop - i
                i = stop
                matched = True
                break
        if matched:
            continue
        for marker in syn.line_comments:
            if text.startswith(marker, i):
                end = text.find("\n", i)
                stop = n if end < 0 else end
                blank(i, stop)
                comment_chars += stop - i
                i = stop
                matched = True
                break
        if matched:
            continue
        if syn.char_literal_quote and ch == "'":
            m = _RUST_CHAR_LITERAL.match(text, i)
            if m:
                blank(i, m.end())
                i = m.end()
            else:
                i += 1  # lifetime marker, leave as-is
            continue
        for delim in syn.string_delims:
            if text.startswith(delim, i):
                j = i + len(delim)
                escaped = delim not in syn.raw_delims
                while j < n:
                    if escaped and text[j] == "\\":
                        j += 2
                        continue
                    if text.startswith(delim, j):
                        j += len(delim)
                        break
                    j += 1
                blank(i, j)
                i = min(j, n)
                matched = True
                break
        if matched:
            continue
        i += 1
    return "".join(out), comment_chars


# ---------------------------------------------------------------------------
# Lexical complexity score
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LexicalProfile:
    """Counts of control-flow statements and logical operators, plus the score."""

    n_cf: int
    n_op: int
    lcs: Decimal

    def __post_init__(self) -> None:
        expected = Decimal(2 + 2 * self.n_cf + self.n_op) / 2
        if self.lcs != expected:
            raise DataError(f"lcs {self.lcs} != 1 + {self.n_cf} + {self.n_op}/2")

    @classmethod
    def from_counts(cls, n_cf: int, n_op: int) -> "LexicalProfile":
        return cls(n_cf=n_cf, n_op=n_op, lcs=Decimal(2 + 2 * n_cf + n_op) / 2)


class LcsRuleSet:
    """Compiled counting rules for one language."""

    def __init__(
        self,
        language: LanguageId,
        control_flow_patterns: list[str],
        logical_op_patterns: list[str],
        ignore_case: bool = False,
    ):
        if not control_flow_patterns or not logical_op_patterns:
            raise DataError(f"rule set for {language.value} has an empty pattern list")
        self.language = language
        self.control_flow_patterns = list(control_flow_patterns)
        self.logical_op_patterns = list(logical_op_patterns)
        self.ignore_case = ignore_case
        flags = re.IGNORECASE if ignore_case else 0
        try:
            self._cf = [re.compile(p, flags) for p in control_flow_patterns]
            self._op = [re.compile(p, flags) for p in logical_op_patterns]
        except re.error as exc:
            raise DataError(f"rule set for {language.value}: bad pattern: {exc}") from exc

    def count(self, masked_text: str) -> tuple[int, int]:
        n_cf = sum(len(p.findall(masked_text)) for p in self._cf)
        n_op = sum(len(p.findall(masked_text)) for p in self._op)
        return n_cf, n_op


class RuleTable:
    """Per-language rule sets with a generic fallback."""

    def __init__(self, version: int, generic: LcsRuleSet, languages: Mapping[LanguageId, LcsRuleSet]):
        self.version = version
        self.generic = generic
        self.languages = dict(languages)

    def for_language(self, language: LanguageId) -> LcsRuleSet:
        return self.languages.get(language, self.generic)

    @classmethod
    def from_obj(cls, obj: dict) -> "RuleTable":
        def build(language: LanguageId, spec: dict) -> LcsRuleSet:
            return LcsRuleSet(
                language,
                spec["control_flow"],
                spec["logical_ops"],
                ignore_case=bool(spec.get("ignore_case", False)),
            )

        generic = build(LanguageId.OTHER, obj["generic"])
        languages = {}
        for name, spec in obj.get("languages", {}).items():
            lang = LanguageId(name)
            languages[lang] = build(lang, spec)
        return cls(int(obj.get("version", 1)), generic, languages)


def load_rules(path: str | Path | None = None) -> RuleTable:
    """Load counting rules from a config file, or the packaged defaults."""
    if path is None:
        return _default_rules()
    with open(path, "r", encoding="utf-8") as fh:
        return RuleTable.from_obj(json.load(fh))


@lru_cache(maxsize=1)
def _default_rules() -> RuleTable:
    data = resources.files("codeprov.data").joinpath("lcs_rules.json").read_text("utf-8")
    return RuleTable.from_obj(json.loads(data))


def lexical_profile(content: str, language: LanguageId, rules: RuleTable | None = None) -> LexicalProfile:
    """Count control-flow statements and logical operators; derive the score."""
    table = rules if rules is not None else _default_rules()
    masked, _ = mask_literals(content, language)
    n_cf, n_op = table.for_language(language).count(masked)
    return LexicalProfile.from_counts(n_cf, n_op)


def lcs_histogram(values: Iterable[Decimal], edges: tuple[int, int] = (20, 80)) -> dict[str, int]:
    """Bucket scores at the report edges (low/mid/high); presentation only."""
    low, high = edges
    buckets = {f"<= {low}": 0, f"{low} - {high}": 0, f"> {high}": 0}
    for value in values:
        if value <= low:
            buckets[f"<= {low}"] += 1
        elif value <= high:
            buckets[f"{low} - {high}"] += 1
        else:
            buckets[f"> {high}"] += 1
    return buckets


# ---------------------------------------------------------------------------
# File-function / tech-stack / application-domain taxonomies
# ---------------------------------------------------------------------------

_DOC_EXTENSIONS = {".md", ".markdown", ".rst", ".txt", ".adoc"}
_CONFIG_EXTENSIONS = {".json", ".yaml", ".yml", ".toml", ".ini", ".xml", ".csv", ".lock", ".cfg", ".properties"}
_CODE_EXTENSIONS = {
    ext for ext, lang in _EXTENSION_MAP.items()
    if lang not in (LanguageId.MARKDOWN, LanguageId.YAML)
}
_TEST_DIRS = {"test", "tests", "spec", "specs", "__tests__"}


def classify_file_function(path: str) -> FileFunction:
    """First-match classification: docs, tests, config, code, other."""
    if not path:
        raise DataError("path must be non-empty")
    p = Path(path.replace("\\", "/"))
    ext = p.suffix.lower()
    parts = [part.lower() for part in p.parts[:-1]]
    stem = p.stem.lower()
    if ext in _DOC_EXTENSIONS or "docs" in parts or "doc" in parts:
        return FileFunction.DOCUMENTATION
    if any(part in _TEST_DIRS for part in parts):
        return FileFunction.TEST_CODE
    if ext in _CODE_EXTENSIONS and ("test" in stem or "spec" in stem):
        return FileFunction.TEST_CODE
    if ext in _CONFIG_EXTENSIONS:
        return FileFunction.CONFIG_DATA
    if ext in _CODE_EXTENSIONS:
        return FileFunction.CORE_LOGIC
    return FileFunction.OTHER


_STACK_TABLE: dict[LanguageId, TechStack] = {
    LanguageId.PYTHON: TechStack.DYNAMIC_SCRIPTING,
    LanguageId.JAVASCRIPT: TechStack.DYNAMIC_SCRIPTING,
    # TypeScript rides the JS ecosystem even though it is statically typed.
    LanguageId.TYPESCRIPT: TechStack.DYNAMIC_SCRIPTING,
    LanguageId.RUBY: TechStack.DYNAMIC_SCRIPTING,
    LanguageId.PHP: TechStack.DYNAMIC_SCRIPTING,
    LanguageId.SHELL: TechStack.DYNAMIC_SCRIPTING,
    LanguageId.JUPYTER: TechStack.DYNAMIC_SCRIPTING,
    LanguageId.C: TechStack.STATIC_SYSTEM,
    LanguageId.CPP: TechStack.STATIC_SYSTEM,
    LanguageId.RUST: TechStack.STATIC_SYSTEM,
    LanguageId.JAVA: TechStack.STATIC_SYSTEM,
    LanguageId.CSHARP: TechStack.STATIC_SYSTEM,
    LanguageId.GO: TechStack.STATIC_SYSTEM,
    LanguageId.SCALA: TechStack.STATIC_SYSTEM,
    LanguageId.HTML: TechStack.DECLARATIVE,
    LanguageId.CSS: TechStack.DECLARATIVE,
    LanguageId.SQL: TechStack.DECLARATIVE,
    LanguageId.MARKDOWN: TechStack.DECLARATIVE,
    LanguageId.YAML: TechStack.DECLARATIVE,
}


def classify_tech_stack(language: LanguageId) -> TechStack:
    return _STACK_TABLE.get(language, TechStack.OTHER)


# Domain keyword rules, checked in this order; the first domain with a
# matching token wins, otherwise Others. Matching is on whole path/repo
# tokens so short keywords cannot fire inside unrelated words.
_DOMAIN_RULES: tuple[tuple[AppDomain, tuple[str, ...]], ...] = (
    (AppDomain.WEB_APPLICATION, ("web", "webapp", "http", "https", "route", "routes", "router",
                                 "api", "rest", "frontend", "backend", "django", "flask", "express",
                                 "views", "controllers", "templates")),
    (AppDomain.LANGUAGE_RUNTIME, ("compiler", "interpreter", "runtime", "parser", "lexer",
                                  "grammar", "bytecode", "jit", "ast", "tokenizer")),
    (AppDomain.DATA_MANAGEMENT, ("database", "db", "sql", "sqlite", "postgres", "mysql", "redis",
                                 "storage", "persistence", "cache", "orm", "migrations")),
    (AppDomain.DATA_SCIENCE, ("data", "dataset", "ml", "model", "models", "train", "training",
                              "numpy", "pandas", "analytics", "etl", "spark", "statistics")),
    (AppDomain.NETWORK_SECURITY, ("network", "net", "socket", "tcp", "udp", "tls", "ssl", "crypto",
                                  "auth", "security", "distributed", "rpc", "grpc", "proxy")),
    (AppDomain.OPERATIONS_RELIABILITY, ("ops", "deploy", "deployment", "monitor", "monitoring",
                                        "logging", "ci", "cd", "docker", "kubernetes", "k8s",
                                        "infra", "ansible", "terraform", "backup")),
    (AppDomain.CLIENT_GRAPHICS, ("ui", "gui", "render", "renderer", "graphics", "game", "games",
                                 "canvas", "widget", "widgets", "animation", "opengl", "shader")),
    (AppDomain.PLATFORMS_SYSTEMS, ("kernel", "driver", "drivers", "os", "embedded", "firmware",
                                   "platform", "bootloader", "syscall")),
)

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")


def domain_for(path: str | None, repo: str | None = None) -> AppDomain:
    """Keyword heuristic over path/repo text; first matching domain wins."""
    text = " ".join(filter(None, (path, repo))).lower()
    tokens = set(_TOKEN_SPLIT.split(text)) - {""}
    for domain, keywords in _DOMAIN_RULES:
        if any(keyword in tokens for keyword in keywords):
            return domain
    return AppDomain.OTHERS


def classify_app_domain(sample: CodeSample) -> AppDomain:
    return domain_for(sample.origin.path, sample.origin.repo)


def code_extensions() -> frozenset[str]:
    """Extensions treated as source code (documentation/config excluded)."""
    return frozenset(_CODE_EXTENSIONS)
