"""Canonical record types and JSON Lines serialization.

Every corpus artifact is a JSON Lines file (UTF-8, LF, one object per line)
with a ``"schema": 1`` field and a fixed key order, so that serializing the
same record twice yields byte-identical lines.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, fields
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Any, BinaryIO, Iterable

SCHEMA_VERSION = 1


class CodeProvError(Exception):
    """Base class for all toolkit errors."""


class DataError(CodeProvError):
    """Invalid or inconsistent input data (CLI exit code 2)."""


class InvalidRecordError(DataError):
    """A record violates one of its type invariants."""

    def __init__(self, record_id: str, message: str):
        super().__init__(f"record {record_id!r}: {message}")
        self.record_id = record_id


class ProvenanceLabel(str, Enum):
    HUMAN = "human"
    AI = "ai"
    UNKNOWN = "unknown"


class LanguageId(str, Enum):
    """Mainstream languages tracked by the toolkit, plus a catch-all."""

    PYTHON = "python"
    JAVA = "java"
    CPP = "cpp"
    C = "c"
    CSHARP = "csharp"
    JAVASCRIPT = "javascript"
    TYPESCRIPT = "typescript"
    RUBY = "ruby"
    PHP = "php"
    GO = "go"
    RUST = "rust"
    SHELL = "shell"
    SCALA = "scala"
    HTML = "html"
    CSS = "css"
    SQL = "sql"
    MARKDOWN = "markdown"
    YAML = "yaml"
    JUPYTER = "jupyter"
    OTHER = "other"


class FileFunction(str, Enum):
    DOCUMENTATION = "documentation"
    CORE_LOGIC = "core_logic"
    TEST_CODE = "test_code"
    CONFIG_DATA = "config_data"
    OTHER = "other"


class TechStack(str, Enum):
    DYNAMIC_SCRIPTING = "dynamic_scripting"
    STATIC_SYSTEM = "static_system"
    DECLARATIVE = "declarative"
    OTHER = "other"


class AppDomain(str, Enum):
    WEB_APPLICATION = "web_application"
    LANGUAGE_RUNTIME = "language_runtime"
    DATA_MANAGEMENT = "data_management"
    DATA_SCIENCE = "data_science"
    NETWORK_SECURITY = "network_security"
    OPERATIONS_RELIABILITY = "operations_reliability"
    CLIENT_GRAPHICS = "client_graphics"
    PLATFORMS_SYSTEMS = "platforms_systems"
    OTHERS = "others"


class ChangeKind(str, Enum):
    ADDED = "added"
    MODIFIED = "modified"
    DELETED = "deleted"


class AttackVector(str, Enum):
    NETWORK = "network"
    ADJACENT = "adjacent"
    LOCAL = "local"
    PHYSICAL = "physical"


# Enums where an unrecognized string on read degrades to a catch-all variant
# (with a diagnostic) instead of rejecting the line.
_ENUM_FALLBACKS: dict[type, Enum] = {
    LanguageId: LanguageId.OTHER,
    FileFunction: FileFunction.OTHER,
    TechStack: TechStack.OTHER,
    AppDomain: AppDomain.OTHERS,
    ProvenanceLabel: ProvenanceLabel.UNKNOWN,
}

_CVE_RE = re.compile(r"^CVE-\d{4}-\d{4,}$")
_CWE_RE = re.compile(r"^CWE-\d+$")
_HEX_RE = re.compile(r"^[0-9a-f]{4,40}$")


@dataclass(frozen=True)
class Diagnostic:
    """A non-fatal problem encountered while processing a stream."""

    message: str
    line: int | None = None
    context: str | None = None

    def __str__(self) -> str:
        prefix = f"line {self.line}: " if self.line is not None else ""
        suffix = f" ({self.context})" if self.context else ""
        return f"{prefix}{self.message}{suffix}"


@dataclass(frozen=True)
class OriginMeta:
    """Where a sample came from: a repository or a generator model.

    ``lossy_decode`` marks content that was not valid UTF-8 on ingestion and
    was decoded with replacement characters.
    """

    repo: str | None = None
    generator: str | None = None
    commit: str | None = None
    path: str | None = None
    timestamp: int | None = None
    app_domain: AppDomain | None = None
    lossy_decode: bool = False


@dataclass(frozen=True)
class CodeSample:
    """One file-granularity unit of code with its provenance label."""

    id: str
    content: str
    language: LanguageId
    label: ProvenanceLabel
    origin: OriginMeta = field(default_factory=OriginMeta)

    def validate(self) -> None:
        if not self.id:
            raise InvalidRecordError("<empty>", "id must be non-empty")
        if self.label is ProvenanceLabel.HUMAN and not self.origin.repo:
            raise InvalidRecordError(self.id, "human-labeled sample lacks repo origin")
        if self.label is ProvenanceLabel.AI and not self.origin.generator:
            raise InvalidRecordError(self.id, "ai-labeled sample lacks generator origin")

    def __post_init__(self) -> None:
        self.validate()


@dataclass(frozen=True)
class CommitFileChange:
    """A pre/post code pair from one commit touching one file."""

    repo: str
    commit: str
    timestamp: int
    path: str
    change_kind: ChangeKind
    pre_content: str | None = None
    post_content: str | None = None

    @property
    def id(self) -> str:
        return f"{self.commit}:{self.path}"

    def validate(self) -> None:
        if not _HEX_RE.match(self.commit):
            raise InvalidRecordError(self.id, f"commit {self.commit!r} is not a hex hash")
        if not self.path:
            raise InvalidRecordError(self.id, "path must be non-empty")
        kind = self.change_kind
        if kind is ChangeKind.ADDED and not (self.pre_content is None and self.post_content is not None):
            raise InvalidRecordError(self.id, "added change must have only post_content")
        if kind is ChangeKind.DELETED and not (self.pre_content is not None and self.post_content is None):
            raise InvalidRecordError(self.id, "deleted change must have only pre_content")
        if kind is ChangeKind.MODIFIED and (self.pre_content is None or self.post_content is None):
            raise InvalidRecordError(self.id, "modified change must have both contents")

    def __post_init__(self) -> None:
        self.validate()


@dataclass(frozen=True)
class VulnRecord:
    """One CVE-linked change: a vulnerable fragment and its patch."""

    cve_id: str
    cwe_id: str
    cvss_base: float
    attack_vector: AttackVector
    language: LanguageId
    vulnerable_fragment: str
    patched_fragment: str
    intro_source: ProvenanceLabel
    fix_source: ProvenanceLabel
    disclosed: date

    def validate(self) -> None:
        if not _CVE_RE.match(self.cve_id):
            raise InvalidRecordError(self.cve_id or "<empty>", "cve_id does not match CVE-YYYY-NNNN+")
        if not _CWE_RE.match(self.cwe_id):
            raise InvalidRecordError(self.cve_id, f"cwe_id {self.cwe_id!r} does not match CWE-N")
        if not 0.0 <= self.cvss_base <= 10.0:
            raise InvalidRecordError(self.cve_id, f"cvss_base {self.cvss_base} outside [0, 10]")
        if self.vulnerable_fragment == self.patched_fragment:
            raise InvalidRecordError(self.cve_id, "vulnerable and patched fragments are identical")
        for name in ("intro_source", "fix_source"):
            if getattr(self, name) not in (ProvenanceLabel.HUMAN, ProvenanceLabel.AI):
                raise InvalidRecordError(self.cve_id, f"{name} must be human or ai")

    @property
    def id(self) -> str:
        return self.cve_id

    def __post_init__(self) -> None:
        self.validate()


Record = CodeSample | CommitFileChange | VulnRecord

# Canonical field order per record kind; keys are emitted in exactly this
# order so identical records serialize to identical bytes.
_KIND_NAMES = {CodeSample: "code_sample", CommitFileChange: "commit_file_change", VulnRecord: "vuln_record"}
_ORIGIN_ORDER = ("repo", "generator", "commit", "path", "timestamp", "app_domain", "lossy_decode")


def _origin_to_obj(origin: OriginMeta) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key in _ORIGIN_ORDER:
        value = getattr(origin, key)
        if key == "lossy_decode":
            if value:
                out[key] = True
        elif value is not None:
            out[key] = value.value if isinstance(value, Enum) else value
    return out


def record_to_obj(record: Record) -> dict[str, Any]:
    """Serialize one record to a plain dict in canonical key order."""
    obj: dict[str, Any] = {"schema": SCHEMA_VERSION, "kind": _KIND_NAMES[type(record)]}
    for f in fields(record):
        value = getattr(record, f.name)
        if isinstance(value, OriginMeta):
            obj[f.name] = _origin_to_obj(value)
        elif isinstance(value, Enum):
            obj[f.name] = value.value
        elif isinstance(value, date):
            obj[f.name] = value.isoformat()
        else:
            obj[f.name] = value
    return obj


def record_to_line(record: Record) -> str:
    return json.dumps(record_to_obj(record), ensure_ascii=False, separators=(",", ":"))


def _coerce_enum(enum_cls: type, raw: Any, field_name: str, diagnostics: list[Diagnostic], line_no: int) -> Enum:
    try:
        return enum_cls(raw)
    except ValueError:
        fallback = _ENUM_FALLBACKS.get(enum_cls)
        if fallback is None:
            raise DataError(f"{field_name}: unknown value {raw!r}")
        diagnostics.append(
            Diagnostic(f"unknown {field_name} {raw!r} mapped to {fallback.value!r}", line=line_no)
        )
        return fallback


def _parse_origin(obj: dict[str, Any], diagnostics: list[Diagnostic], line_no: int) -> OriginMeta:
    domain = obj.get("app_domain")
    return OriginMeta(
        repo=obj.get("repo"),
        generator=obj.get("generator"),
        commit=obj.get("commit"),
        path=obj.get("path"),
        timestamp=obj.get("timestamp"),
        app_domain=None if domain is None else _coerce_enum(AppDomain, domain, "app_domain", diagnostics, line_no),
        lossy_decode=bool(obj.get("lossy_decode", False)),
    )


def record_from_obj(obj: dict[str, Any], kind: type, diagnostics: list[Diagnostic], line_no: int = 0) -> Record:
    """Construct a record from a parsed JSON object; raises DataError when malformed."""
    if not isinstance(obj, dict):
        raise DataError("line is not a JSON object")
    if kind is CodeSample:
        return CodeSample(
            id=str(obj["id"]),
            content=str(obj["content"]),
            language=_coerce_enum(LanguageId, obj["language"], "language", diagnostics, line_no),
            label=_coerce_enum(ProvenanceLabel, obj["label"], "label", diagnostics, line_no),
            origin=_parse_origin(obj.get("origin", {}), diagnostics, line_no),
        )
    if kind is CommitFileChange:
        return CommitFileChange(
            repo=str(obj["repo"]),
            commit=str(obj["commit"]),
            timestamp=int(obj["timestamp"]),
            path=str(obj["path"]),
            change_kind=ChangeKind(obj["change_kind"]),
            pre_content=obj.get("pre_content"),
            post_content=obj.get("post_content"),
        )
    if kind is VulnRecord:
        return VulnRecord(
            cve_id=str(obj["cve_id"]),
            cwe_id=str(obj["cwe_id"]),
            cvss_base=float(obj["cvss_base"]),
            attack_vector=AttackVector(obj["attack_vector"]),
            language=_coerce_enum(LanguageId, obj["language"], "language", diagnostics, line_no),
            vulnerable_fragment=str(obj["vulnerable_fragment"]),
            patched_fragment=str(obj["patched_fragment"]),
            intro_source=ProvenanceLabel(obj["intro_source"]),
            fix_source=ProvenanceLabel(obj["fix_source"]),
            disclosed=date.fromisoformat(str(obj["disclosed"])),
        )
    raise DataError(f"unsupported record kind {kind!r}")


def _open_sink(sink: BinaryIO | str | Path):
    if isinstance(sink, (str, Path)):
        return open(sink, "wb"), True
    return sink, False


def _open_source(source: BinaryIO | bytes | str | Path):
    if isinstance(source, bytes):
        import io

        return io.BytesIO(source), True
    if isinstance(source, (str, Path)):
        return open(source, "rb"), True
    return source, False


def write_records(records: Iterable[Record], sink: BinaryIO | str | Path) -> int:
    """Write records as JSON Lines; returns the number of lines written.

    Records are re-validated before writing so that invariant violations are
    reported with the offending record id rather than producing a bad file.
    """
    stream, owned = _open_sink(sink)
    count = 0
    try:
        for record in records:
            record.validate()
            stream.write(record_to_line(record).encode("utf-8") + b"\n")
            count += 1
    finally:
        if owned:
            stream.close()
    return count


def read_records(
    source: BinaryIO | bytes | str | Path, kind: type
) -> tuple[list[Record], list[Diagnostic]]:
    """Read JSON Lines records of one kind.

    Malformed lines never abort the read and are never silently dropped:
    each becomes a Diagnostic carrying its 1-based line number.
    """
    stream, owned = _open_source(source)
    records: list[Record] = []
    diagnostics: list[Diagnostic] = []
    try:
        for line_no, raw in enumerate(stream, start=1):
            text = raw.decode("utf-8", errors="replace").strip()
            if not text:
                continue
            try:
                obj = json.loads(text)
                records.append(record_from_obj(obj, kind, diagnostics, line_no))
            except (DataError, InvalidRecordError) as exc:
                diagnostics.append(Diagnostic(str(exc), line=line_no))
            except (KeyError, TypeError, ValueError) as exc:
                diagnostics.append(Diagnostic(f"malformed {kind.__name__} line: {exc}", line=line_no))
    finally:
        if owned:
            stream.close()
    return records, diagnostics


def decode_lossy(data: bytes) -> tuple[str, bool]:
    """Decode bytes as UTF-8, replacing invalid sequences; flags lossy decodes."""
    try:
        return data.decode("utf-8"), False
    except UnicodeDecodeError:
        return data.decode("utf-8", errors="replace"), True
