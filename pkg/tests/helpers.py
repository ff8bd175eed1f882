"""Shared builders for test corpora and records."""

from __future__ import annotations

import random
from datetime import date

from codeprov import (
    AppDomain,
    AttackVector,
    ChangeKind,
    CodeSample,
    CommitFileChange,
    LanguageId,
    OriginMeta,
    ProvenanceLabel,
    VulnRecord,
)

_CONTENT_POOL = (
    "x = 1\n",
    "if a and b:\n    pass\n",
    "console.log('héllo');\n",
    "päth = \"日本語\"\n",
    "s = 'quote \\' inside'\n",
    "# comment with émoji 🚀\n",
    "int main() { return 0; }\n",
    "SELECT * FROM t WHERE a = 'x';\n",
    "tab\there\nand\nnewlines\n",
    "crlf line\r\nold mac\rmix\n",
    "nul-adjacent \u0001 control chars \u001b[0m\n",
)


def random_content(rng: random.Random) -> str:
    return "".join(rng.choice(_CONTENT_POOL) for _ in range(rng.randint(1, 6)))


def random_code_sample(rng: random.Random, index: int) -> CodeSample:
    label = rng.choice(list(ProvenanceLabel))
    origin = OriginMeta(
        repo=f"org/repo-{rng.randrange(50)}" if label is not ProvenanceLabel.AI else None,
        generator=f"model-{rng.randrange(9)}" if label is ProvenanceLabel.AI else None,
        commit=f"{rng.randrange(16**10):010x}" if rng.random() < 0.7 else None,
        path=f"src/dir{rng.randrange(5)}/file{rng.randrange(99)}.py" if rng.random() < 0.8 else None,
        timestamp=rng.randrange(1_200_000_000, 1_700_000_000) if rng.random() < 0.6 else None,
        app_domain=rng.choice(list(AppDomain)) if rng.random() < 0.5 else None,
        lossy_decode=rng.random() < 0.1,
    )
    return CodeSample(
        id=f"rt-{index}",
        content=random_content(rng),
        language=rng.choice(list(LanguageId)),
        label=label,
        origin=origin,
    )


def random_change(rng: random.Random, index: int) -> CommitFileChange:
    kind = rng.choice(list(ChangeKind))
    pre = random_content(rng) if kind is not ChangeKind.ADDED else None
    post = random_content(rng) if kind is not ChangeKind.DELETED else None
    return CommitFileChange(
        repo=f"org/repo-{rng.randrange(20)}",
        commit=f"{rng.randrange(16**12):012x}",
        timestamp=rng.randrange(1_600_000_000, 1_700_000_000),
        path=f"pkg/mod{index % 7}/f{index}.go",
        change_kind=kind,
        pre_content=pre,
        post_content=post,
    )


def random_vuln(rng: random.Random, index: int) -> VulnRecord:
    vulnerable = random_content(rng)
    return VulnRecord(
        cve_id=f"CVE-20{rng.randrange(10, 26)}-{rng.randrange(1000, 99999)}",
        cwe_id=f"CWE-{rng.randrange(1, 1400)}",
        cvss_base=round(rng.uniform(0, 10), 1),
        attack_vector=rng.choice(list(AttackVector)),
        language=rng.choice(list(LanguageId)),
        vulnerable_fragment=vulnerable,
        patched_fragment=vulnerable + "# patched\n",
        intro_source=rng.choice([ProvenanceLabel.HUMAN, ProvenanceLabel.AI]),
        fix_source=rng.choice([ProvenanceLabel.HUMAN, ProvenanceLabel.AI]),
        disclosed=date(2020 + rng.randrange(6), rng.randrange(1, 13), rng.randrange(1, 28)),
    )


def make_sample(
    sample_id: str,
    content: str = "x = 1\n",
    language: LanguageId = LanguageId.PYTHON,
    label: ProvenanceLabel = ProvenanceLabel.UNKNOWN,
    **origin_fields,
) -> CodeSample:
    if label is ProvenanceLabel.HUMAN:
        origin_fields.setdefault("repo", "example/repo")
    if label is ProvenanceLabel.AI:
        origin_fields.setdefault("generator", "test-model")
    return CodeSample(
        id=sample_id,
        content=content,
        language=language,
        label=label,
        origin=OriginMeta(**origin_fields),
    )


def make_labeled_corpus(n_ai: int, n_human: int, seed: int = 0) -> list[CodeSample]:
    rng = random.Random(seed)
    samples = []
    for i in range(n_ai):
        body = "\n".join(f"value_{rng.randrange(100)} = {rng.randrange(10)}" for _ in range(5))
        samples.append(make_sample(f"ai-{i}", body + "\n", label=ProvenanceLabel.AI))
    for i in range(n_human):
        body = "\n".join(f"thing{rng.randrange(100)} = {rng.random():.3f}" for _ in range(5))
        samples.append(make_sample(f"hum-{i}", body + "\n", label=ProvenanceLabel.HUMAN))
    return samples


def make_vuln(
    cve_id: str = "CVE-2024-1234",
    cwe_id: str = "CWE-79",
    cvss_base: float = 7.5,
    attack_vector: AttackVector = AttackVector.NETWORK,
    language: LanguageId = LanguageId.PYTHON,
    intro_source: ProvenanceLabel = ProvenanceLabel.AI,
    fix_source: ProvenanceLabel = ProvenanceLabel.HUMAN,
    disclosed: date = date(2024, 6, 1),
    vulnerable_fragment: str = "eval(user_input)",
    patched_fragment: str = "ast.literal_eval(user_input)",
) -> VulnRecord:
    return VulnRecord(
        cve_id=cve_id,
        cwe_id=cwe_id,
        cvss_base=cvss_base,
        attack_vector=attack_vector,
        language=language,
        vulnerable_fragment=vulnerable_fragment,
        patched_fragment=patched_fragment,
        intro_source=intro_source,
        fix_source=fix_source,
        disclosed=disclosed,
    )
