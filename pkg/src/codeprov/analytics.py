"""Adoption, security, and trend analytics over verdicts and vulnerability
records: AI file rates by grouping key, top/bottom repo comparisons, net
impact scores, CWE risk profiling, severity rank tests, attack-vector
shares, and calendar-quarter time series."""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction
from importlib import resources
from pathlib import Path
from statistics import fmean
from typing import Mapping, Sequence

from . import lexical
from .cascade import Verdict
from .records import (
    AttackVector,
    CodeSample,
    DataError,
    Diagnostic,
    ProvenanceLabel,
    VulnRecord,
)
from .stats import RankTestResult, mann_whitney_u
from .validation import check_non_empty

DIMENSIONS = ("language", "tech_stack", "file_function", "repo", "all")


class RiskCategory(str, Enum):
    INPUT_VALIDATION_ENCODING = "input_validation_encoding"
    CODE_QUALITY_RISKY_APIS = "code_quality_risky_apis"
    ACCESS_CONTROL_PERMISSIONS = "access_control_permissions"
    OTHER = "other"


@dataclass(frozen=True)
class AdoptionRow:
    key: str
    ai_files: int
    total_files: int
    ai_file_rate: Fraction


@dataclass(frozen=True)
class LanguageImpactRow:
    language: str
    intro_ai_share: Fraction
    fix_ai_share: Fraction
    net_impact: Fraction
    records: int


@dataclass(frozen=True)
class CweProfileRow:
    cwe_id: str
    ai_share: Fraction
    risk_category: RiskCategory
    records: int


@dataclass(frozen=True)
class TopBottomRow:
    n: int
    group: str  # "top" or "bottom"
    mean_rate: Fraction
    mean_total_files: Fraction
    mean_ai_files: Fraction


def pair_verdicts(
    samples: Sequence[CodeSample], verdicts: Sequence[Verdict]
) -> list[tuple[CodeSample, Verdict]]:
    """Join samples with their verdicts by sample id; everything must match."""
    by_id = {v.sample_id: v for v in verdicts}
    missing = [s.id for s in samples if s.id not in by_id]
    if missing:
        raise DataError(f"{len(missing)} samples lack verdicts; first: {missing[0]!r}")
    return [(s, by_id[s.id]) for s in samples]


def _dimension_key(sample: CodeSample, dimension: str) -> str:
    if dimension == "language":
        return sample.language.value
    if dimension == "tech_stack":
        return lexical.classify_tech_stack(sample.language).value
    if dimension == "file_function":
        if not sample.origin.path:
            raise DataError(f"sample {sample.id!r} has no path for file_function grouping")
        return lexical.classify_file_function(sample.origin.path).value
    if dimension == "repo":
        if not sample.origin.repo:
            raise DataError(f"sample {sample.id!r} has no repo for repo grouping")
        return sample.origin.repo
    if dimension == "all":
        return "all"
    raise DataError(f"unknown dimension {dimension!r}; expected one of {DIMENSIONS}")


def adoption_by(
    dimension: str, pairs: Sequence[tuple[CodeSample, Verdict]]
) -> list[AdoptionRow]:
    """AI file rate per grouping key, over final-state files with verdicts."""
    check_non_empty("corpus", pairs)
    totals: dict[str, int] = {}
    ai_counts: dict[str, int] = {}
    for sample, verdict in pairs:
        key = _dimension_key(sample, dimension)
        totals[key] = totals.get(key, 0) + 1
        if verdict.label is ProvenanceLabel.AI:
            ai_counts[key] = ai_counts.get(key, 0) + 1
    return [
        AdoptionRow(
            key=key,
            ai_files=ai_counts.get(key, 0),
            total_files=totals[key],
            ai_file_rate=Fraction(ai_counts.get(key, 0), totals[key]),
        )
        for key in sorted(totals)
    ]


def quarter_of(epoch: int) -> str:
    moment = datetime.fromtimestamp(epoch, tz=timezone.utc)
    return f"{moment.year}Q{(moment.month - 1) // 3 + 1}"


def _quarter_range(first: str, last: str) -> list[str]:
    year, quarter = int(first[:4]), int(first[5])
    end_year, end_quarter = int(last[:4]), int(last[5])
    out = []
    while (year, quarter) <= (end_year, end_quarter):
        out.append(f"{year}Q{quarter}")
        quarter += 1
        if quarter == 5:
            year, quarter = year + 1, 1
    return out


def quarterly_series(
    dimension: str, pairs: Sequence[tuple[CodeSample, Verdict]]
) -> dict[str, list[AdoptionRow]]:
    """Adoption rows per calendar quarter (UTC), empty buckets included.

    Every dimension value observed anywhere in the corpus appears in every
    bucket, with zero counts where the quarter has no files.
    """
    check_non_empty("corpus", pairs)
    for sample, _ in pairs:
        if sample.origin.timestamp is None:
            raise DataError(f"sample {sample.id!r} has no timestamp for the time series")
    keys = sorted({_dimension_key(s, dimension) for s, _ in pairs})
    by_quarter: dict[str, list[tuple[CodeSample, Verdict]]] = {}
    for sample, verdict in pairs:
        by_quarter.setdefault(quarter_of(sample.origin.timestamp), []).append((sample, verdict))
    quarters = _quarter_range(min(by_quarter), max(by_quarter))
    series: dict[str, list[AdoptionRow]] = {}
    for quarter in quarters:
        bucket = by_quarter.get(quarter, [])
        totals: dict[str, int] = {k: 0 for k in keys}
        ai_counts: dict[str, int] = {k: 0 for k in keys}
        for sample, verdict in bucket:
            key = _dimension_key(sample, dimension)
            totals[key] += 1
            if verdict.label is ProvenanceLabel.AI:
                ai_counts[key] += 1
        series[quarter] = [
            AdoptionRow(
                key=key,
                ai_files=ai_counts[key],
                total_files=totals[key],
                ai_file_rate=Fraction(ai_counts[key], totals[key]) if totals[key] else Fraction(0),
            )
            for key in keys
        ]
    return series


def topn_bottomn(
    repo_rows: Sequence[AdoptionRow], n_values: Sequence[int] = (10, 100, 500)
) -> tuple[list[TopBottomRow], list[Diagnostic]]:
    """Compare the highest- and lowest-adoption repos at several group sizes.

    Repos rank by AI file rate descending, ties broken by repo name ascending.
    When fewer than 2n repos exist the groups are computed on what is
    available and a diagnostic records the shortfall.
    """
    rows = check_non_empty("repo_rows", repo_rows)
    ranked = sorted(rows, key=lambda r: (-r.ai_file_rate, r.key))
    out: list[TopBottomRow] = []
    diagnostics: list[Diagnostic] = []
    for n in n_values:
        if len(ranked) < 2 * n:
            diagnostics.append(
                Diagnostic(f"only {len(ranked)} repos available for N={n}; groups may overlap")
            )
        take = min(n, len(ranked))
        for group, members in (("top", ranked[:take]), ("bottom", ranked[-take:])):
            out.append(
                TopBottomRow(
                    n=n,
                    group=group,
                    mean_rate=sum((m.ai_file_rate for m in members), Fraction(0)) / len(members),
                    mean_total_files=Fraction(sum(m.total_files for m in members), len(members)),
                    mean_ai_files=Fraction(sum(m.ai_files for m in members), len(members)),
                )
            )
    return out, diagnostics


def net_impact(records: Sequence[VulnRecord]) -> list[LanguageImpactRow]:
    """Per-language AI introduction share minus AI fix share, plus an overall row."""

    def row(language: str, group: Sequence[VulnRecord]) -> LanguageImpactRow:
        total = len(group)
        intro = Fraction(sum(1 for r in group if r.intro_source is ProvenanceLabel.AI), total)
        fix = Fraction(sum(1 for r in group if r.fix_source is ProvenanceLabel.AI), total)
        return LanguageImpactRow(
            language=language,
            intro_ai_share=intro,
            fix_ai_share=fix,
            net_impact=intro - fix,
            records=total,
        )

    items = check_non_empty("vulnerability records", records)
    by_language: dict[str, list[VulnRecord]] = {}
    for record in items:
        by_language.setdefault(record.language.value, []).append(record)
    rows = [row(language, group) for language, group in sorted(by_language.items())]
    rows.append(row("overall", items))
    return rows


def load_cwe_categories(path: str | Path | None = None) -> dict[str, RiskCategory]:
    """CWE id -> risk category table; defaults to the packaged mapping."""
    if path is None:
        raw = resources.files("codeprov.data").joinpath("cwe_categories.json").read_text("utf-8")
        obj = json.loads(raw)
    else:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    return {cwe: RiskCategory(category) for cwe, category in obj["categories"].items()}


def cwe_profile(
    records: Sequence[VulnRecord], mapping: Mapping[str, RiskCategory]
) -> tuple[list[CweProfileRow], dict[RiskCategory, Fraction], list[Diagnostic]]:
    """Per-CWE AI introduction share, and where AI-introduced records land
    across the risk categories (shares over AI-introduced records sum to 1)."""
    items = check_non_empty("vulnerability records", records)
    diagnostics: list[Diagnostic] = []

    def category_of(cwe_id: str) -> RiskCategory:
        category = mapping.get(cwe_id)
        if category is None:
            diagnostics.append(Diagnostic(f"unmapped {cwe_id} assigned to category 'other'"))
            return RiskCategory.OTHER
        return category

    by_cwe: dict[str, list[VulnRecord]] = {}
    for record in items:
        by_cwe.setdefault(record.cwe_id, []).append(record)
    rows = []
    for cwe_id, group in sorted(by_cwe.items()):
        ai = sum(1 for r in group if r.intro_source is ProvenanceLabel.AI)
        rows.append(
            CweProfileRow(
                cwe_id=cwe_id,
                ai_share=Fraction(ai, len(group)),
                risk_category=category_of(cwe_id),
                records=len(group),
            )
        )

    ai_records = [r for r in items if r.intro_source is ProvenanceLabel.AI]
    category_counts: dict[RiskCategory, int] = {}
    cwe_category = {row.cwe_id: row.risk_category for row in rows}
    for record in ai_records:
        category = cwe_category[record.cwe_id]
        category_counts[category] = category_counts.get(category, 0) + 1
    shares = {
        category: Fraction(count, len(ai_records))
        for category, count in sorted(category_counts.items(), key=lambda kv: kv[0].value)
    }
    return rows, shares, diagnostics


def severity_compare(records: Sequence[VulnRecord], alpha: float = 0.05) -> RankTestResult:
    """Rank-test CVSS severity of AI-introduced vs human-introduced records."""
    items = check_non_empty("vulnerability records", records)
    ai = [r.cvss_base for r in items if r.intro_source is ProvenanceLabel.AI]
    human = [r.cvss_base for r in items if r.intro_source is ProvenanceLabel.HUMAN]
    if not ai or not human:
        raise DataError("severity comparison needs both ai- and human-introduced records")
    return mann_whitney_u(ai, human, alpha=alpha)


def attack_vector_distribution(
    records: Sequence[VulnRecord],
) -> dict[ProvenanceLabel, dict[AttackVector, Fraction]]:
    """Share of each attack vector within each introduction source."""
    by_source: dict[ProvenanceLabel, list[VulnRecord]] = {}
    for record in records:
        by_source.setdefault(record.intro_source, []).append(record)
    table: dict[ProvenanceLabel, dict[AttackVector, Fraction]] = {}
    for source in sorted(by_source, key=lambda s: s.value):
        group = by_source[source]
        counts: dict[AttackVector, int] = {}
        for record in group:
            counts[record.attack_vector] = counts.get(record.attack_vector, 0) + 1
        table[source] = {
            vector: Fraction(counts.get(vector, 0), len(group)) for vector in AttackVector
        }
    return table


@dataclass(frozen=True)
class QuarterVulnRow:
    quarter: str
    records: int
    intro_ai_rate: Fraction
    fix_ai_rate: Fraction
    mean_cvss_ai_intro: float | None
    mean_cvss_human_intro: float | None


def quarterly_vuln_series(records: Sequence[VulnRecord]) -> list[QuarterVulnRow]:
    """Per disclosure quarter: AI introduction/fix rates and mean severities."""
    items = check_non_empty("vulnerability records", records)
    by_quarter: dict[str, list[VulnRecord]] = {}
    for record in items:
        epoch = int(datetime.combine(record.disclosed, datetime.min.time(), timezone.utc).timestamp())
        by_quarter.setdefault(quarter_of(epoch), []).append(record)
    rows = []
    for quarter in _quarter_range(min(by_quarter), max(by_quarter)):
        group = by_quarter.get(quarter, [])
        if not group:
            rows.append(QuarterVulnRow(quarter, 0, Fraction(0), Fraction(0), None, None))
            continue
        ai_cvss = [r.cvss_base for r in group if r.intro_source is ProvenanceLabel.AI]
        human_cvss = [r.cvss_base for r in group if r.intro_source is ProvenanceLabel.HUMAN]
        rows.append(
            QuarterVulnRow(
                quarter=quarter,
                records=len(group),
                intro_ai_rate=Fraction(len(ai_cvss), len(group)),
                fix_ai_rate=Fraction(sum(1 for r in group if r.fix_source is ProvenanceLabel.AI), len(group)),
                mean_cvss_ai_intro=fmean(ai_cvss) if ai_cvss else None,
                mean_cvss_human_intro=fmean(human_cvss) if human_cvss else None,
            )
        )
    return rows
