"""Command-line pipeline: harvest, build-corpus, import-vulns, detect,
evaluate, analyze, report.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
Diagnostics and progress go to standard error; data goes to files or
standard output. Identical inputs, config, and seed produce byte-identical
artifacts.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import charts
from .analytics import (
    adoption_by,
    attack_vector_distribution,
    cwe_profile,
    load_cwe_categories,
    net_impact,
    pair_verdicts,
    quarter_of,
    quarterly_series,
    quarterly_vuln_series,
    severity_compare,
    topn_bottomn,
)
from .cascade import (
    CascadeEnsemble,
    EnsembleConfig,
    EnsembleMode,
    read_verdicts,
    write_verdicts,
)
from .corpus import (
    DEFAULT_HUMAN_WINDOW,
    DEFAULT_WILD_WINDOW,
    HarvestSpec,
    build_ai_subset,
    build_human_subset,
    build_wild_corpus,
    cascade_fragment_labeler,
    dedup,
    harvest_repo,
    import_vuln_records,
    load_generator_import,
    load_task_matrix,
    subprocess_generator,
)
from .detectors import (
    ConstantDetector,
    Detector,
    NgramPerplexityDetector,
    StyleDetector,
    SubprocessScoreDetector,
    TokenEntropyDetector,
    load_external_scores,
)
from .evaluation import ALL_MODES, evaluate_ensemble
from .lexical import lcs_histogram, lexical_profile, load_rules
from .metrics import MetricsReport
from .records import (
    CodeProvError,
    CodeSample,
    CommitFileChange,
    DataError,
    Diagnostic,
    VulnRecord,
    read_records,
    write_records,
)

TOOL_VERSION = "0.1.0"
SCHEMA_VERSION = 1
ENV_CONFIG = "CODEPROV_CONFIG"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

log = logging.getLogger("codeprov")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the CLI contract wants 1
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    workers: int = 1
    log_level: str = "warning"
    schema: int = SCHEMA_VERSION


def _parse_when(text: str) -> datetime:
    try:
        moment = datetime.fromisoformat(text)
    except ValueError as exc:
        raise DataError(f"bad timestamp {text!r}: {exc}")
    return moment if moment.tzinfo else moment.replace(tzinfo=timezone.utc)


def _print_diagnostics(diagnostics: list[Diagnostic], source: str) -> None:
    for diagnostic in diagnostics:
        log.warning("%s: %s", source, diagnostic)


def _require_file(path: str | Path) -> Path:
    p = Path(path)
    if not p.exists():
        raise DataError(f"input file not found: {p}")
    return p


def _fraction_str(value: Fraction | None) -> str:
    if value is None:
        return "undefined"
    return str(float(value))


# ---------------------------------------------------------------------------
# Ensemble construction from a config file
# ---------------------------------------------------------------------------


def load_run_config(args) -> tuple[dict, RunConfig]:
    path = getattr(args, "config", None) or os.environ.get(ENV_CONFIG)
    if not path:
        raise DataError(f"no ensemble config: pass --config or set {ENV_CONFIG}")
    with open(_require_file(path), "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    run = RunConfig(
        seed=args.seed if args.seed is not None else int(cfg.get("seed", 0)),
        workers=args.workers if args.workers is not None else int(cfg.get("workers", 1)),
        log_level=args.log_level or cfg.get("log_level", "warning"),
    )
    logging.getLogger().setLevel(run.log_level.upper())
    return cfg, run


def _read_samples(path: str | Path) -> list[CodeSample]:
    samples, diagnostics = read_records(_require_file(path), CodeSample)
    _print_diagnostics(diagnostics, str(path))
    return samples


def build_detectors(cfg: dict, scores_paths: list[str], run: RunConfig) -> dict[str, Detector]:
    registry: dict[str, Detector] = {}
    for scores_path in scores_paths:
        externals, diagnostics = load_external_scores(_require_file(scores_path))
        _print_diagnostics(diagnostics, scores_path)
        registry.update(externals)
    for entry in cfg.get("detectors", []):
        detector_id = entry["id"]
        kind = entry.get("kind", "external")
        seed = int(entry.get("seed", run.seed))
        if kind == "external":
            if detector_id not in registry:
                raise DataError(
                    f"external detector {detector_id!r} has no scores; pass --scores"
                )
            continue
        if kind == "constant":
            registry[detector_id] = ConstantDetector(float(entry["value"]), detector_id=detector_id)
        elif kind == "subprocess":
            registry[detector_id] = SubprocessScoreDetector(entry["command"], detector_id=detector_id)
        elif kind in ("ngram", "entropy", "style"):
            train = _read_samples(entry["train"])
            if kind == "ngram":
                detector = NgramPerplexityDetector(
                    order=int(entry.get("order", 4)),
                    slope=float(entry.get("slope", 1.0)),
                    seed=seed,
                    detector_id=detector_id,
                )
            elif kind == "entropy":
                detector = TokenEntropyDetector(
                    slope=float(entry.get("slope", 1.0)), seed=seed, detector_id=detector_id
                )
            else:
                detector = StyleDetector(
                    epochs=int(entry.get("epochs", 300)),
                    learning_rate=float(entry.get("learning_rate", 0.5)),
                    seed=seed,
                    detector_id=detector_id,
                )
            registry[detector_id] = detector.fit(train)
        else:
            raise DataError(f"unknown detector kind {kind!r} for {detector_id!r}")
    return registry


def build_ensemble(
    cfg: dict,
    scores_paths: list[str],
    run: RunConfig,
    mode: str | None,
    tau1: str | None = None,
    tau2: str | None = None,
) -> CascadeEnsemble:
    config = EnsembleConfig(
        master_id=cfg["master_id"],
        aux_ids=tuple(cfg.get("aux_ids", ())),
        tau1=tau1 if tau1 is not None else str(cfg.get("tau1", "0.9")),
        tau2=tau2 if tau2 is not None else str(cfg.get("tau2", "0.53")),
        mode=EnsembleMode((mode or cfg.get("mode", "full")).replace("-", "_")),
        weights={k: str(v) for k, v in cfg.get("weights", {}).items()},
    )
    return CascadeEnsemble(build_detectors(cfg, scores_paths, run), config)


def _resolve_repos(args) -> list[Path]:
    repos = [Path(r) for r in args.repo]
    if getattr(args, "repo_list", None):
        with open(_require_file(args.repo_list), "r", encoding="utf-8") as fh:
            for line in fh:
                entry = line.strip()
                if entry and not entry.startswith("#"):
                    repos.append(Path(entry))
    return [_require_file(r) for r in repos]


def _harvest_many(
    spec: HarvestSpec, repos: list[Path], workers: int
) -> tuple[list[CommitFileChange], list[Diagnostic]]:
    """Harvest repos in a worker pool; output order follows the input order."""
    from concurrent.futures import ThreadPoolExecutor

    if workers > 1 and len(repos) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda r: harvest_repo(spec, r), repos))
    else:
        results = [harvest_repo(spec, r) for r in repos]
    changes: list[CommitFileChange] = []
    diagnostics: list[Diagnostic] = []
    for per_repo_changes, per_repo_diags in results:
        changes.extend(per_repo_changes)
        diagnostics.extend(per_repo_diags)
    return changes, diagnostics


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_harvest(args) -> int:
    spec = HarvestSpec(
        window_start=_parse_when(args.window_start),
        window_end=_parse_when(args.window_end),
        extension_allowlist=frozenset(args.allowlist.split(",")) if args.allowlist else None,
        max_file_size=args.max_file_size,
    )
    repos = _resolve_repos(args)
    if not repos:
        raise DataError("harvest needs at least one --repo or a --repo-list file")
    changes, diagnostics = _harvest_many(spec, repos, args.workers or 1)
    _print_diagnostics(diagnostics, "harvest")
    count = write_records(changes, args.out)
    log.info("wrote %d changes to %s", count, args.out)
    return EXIT_OK


def cmd_build_corpus(args) -> int:
    if args.mode == "ai":
        matrix = load_task_matrix(args.matrix)
        if args.generator_cmd:
            responses = subprocess_generator(args.generator_cmd.split(), matrix)
        elif args.import_file:
            responses, diagnostics = load_generator_import(_require_file(args.import_file))
            _print_diagnostics(diagnostics, args.import_file)
        else:
            raise DataError("ai mode needs --import or --generator-cmd")
        samples, diagnostics = build_ai_subset(matrix, responses)
        _print_diagnostics(diagnostics, "ai subset")
    else:
        default_window = DEFAULT_HUMAN_WINDOW if args.mode == "human" else DEFAULT_WILD_WINDOW
        spec = HarvestSpec(
            window_start=_parse_when(args.window_start) if args.window_start else default_window[0],
            window_end=_parse_when(args.window_end) if args.window_end else default_window[1],
            extension_allowlist=frozenset(args.allowlist.split(",")) if args.allowlist else None,
            max_file_size=args.max_file_size,
        )
        repos = _resolve_repos(args)
        if not repos:
            raise DataError(f"{args.mode} mode needs at least one --repo or a --repo-list file")
        if args.mode == "human":
            samples, diagnostics = build_human_subset(spec, repos)
        else:
            samples, changes, diagnostics = build_wild_corpus(spec, repos, per_commit=args.per_commit)
            if args.changes_out:
                write_records(changes, args.changes_out)
        _print_diagnostics(diagnostics, "harvest")
    if not args.no_dedup:
        samples, removed = dedup(samples)
        if removed:
            log.info("dedup removed %d samples", removed)
    count = write_records(samples, args.out)
    log.info("wrote %d samples to %s", count, args.out)
    return EXIT_OK


def cmd_import_vulns(args) -> int:
    labeler = None
    if args.label_with:
        cfg, run = load_run_config(argparse.Namespace(
            config=args.label_with, seed=args.seed, workers=args.workers, log_level=args.log_level
        ))
        ensemble = build_ensemble(cfg, args.scores or [], run, mode=None)
        labeler = cascade_fragment_labeler(ensemble)
    records, diagnostics = import_vuln_records(_require_file(args.input), labeler)
    _print_diagnostics(diagnostics, str(args.input))
    count = write_records(records, args.out)
    log.info("wrote %d vulnerability records to %s", count, args.out)
    return EXIT_OK


def cmd_detect(args) -> int:
    cfg, run = load_run_config(args)
    ensemble = build_ensemble(cfg, args.scores or [], run, mode=args.mode,
                              tau1=args.tau1, tau2=args.tau2)
    samples = _read_samples(args.input)
    result = ensemble.classify_batch(samples, workers=run.workers)
    for failure in result.failures:
        log.error("sample %s failed: %s", failure.sample_id, failure.error)
    write_verdicts(result.verdicts, args.out)
    log.info("wrote %d verdicts to %s", len(result.verdicts), args.out)
    if result.verdicts or not result.failures:
        return EXIT_OK
    raise DataError("every sample failed to classify")


_METRIC_COLUMNS = ("mode", "accuracy", "precision", "recall", "f1", "tp", "fp", "fn", "tn")


def _metrics_row(mode: str, report: MetricsReport) -> list[str]:
    counts = report.counts
    return [
        mode,
        _fraction_str(report.accuracy),
        _fraction_str(report.precision),
        _fraction_str(report.recall),
        _fraction_str(report.f1),
        str(counts.tp),
        str(counts.fp),
        str(counts.fn),
        str(counts.tn),
    ]


def cmd_evaluate(args) -> int:
    cfg, run = load_run_config(args)
    ensemble = build_ensemble(cfg, args.scores or [], run, mode=args.mode,
                              tau1=args.tau1, tau2=args.tau2)
    corpus = _read_samples(args.corpus)
    modes = ALL_MODES if args.ablations else (ensemble.config.mode,)
    reports = evaluate_ensemble(ensemble, corpus, modes=modes, workers=run.workers)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_METRIC_COLUMNS)
        for mode, report in reports.items():
            writer.writerow(_metrics_row(mode.value, report))
    log.info("wrote evaluation report to %s", args.out)
    return EXIT_OK


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _adoption_outputs(out_dir: Path, name: str, title: str, rows) -> None:
    _write_csv(
        out_dir / f"{name}.csv",
        ["key", "ai_files", "total_files", "ai_file_rate"],
        [[r.key, str(r.ai_files), str(r.total_files), _fraction_str(r.ai_file_rate)] for r in rows],
    )
    charts.write_svg(
        out_dir / f"{name}.svg",
        charts.bar_chart(
            [r.key for r in rows],
            {"ai_file_rate": [float(r.ai_file_rate) for r in rows]},
            title,
        ),
    )


def _series_outputs(out_dir: Path, name: str, title: str, series: dict[str, list]) -> None:
    quarters = list(series)
    keys = [row.key for row in next(iter(series.values()))] if series else []
    _write_csv(
        out_dir / f"{name}.csv",
        ["quarter", "key", "ai_files", "total_files", "ai_file_rate"],
        [
            [quarter, row.key, str(row.ai_files), str(row.total_files), _fraction_str(row.ai_file_rate)]
            for quarter, rows in series.items()
            for row in rows
        ],
    )
    lines = {
        key: [float(next(r.ai_file_rate for r in series[q] if r.key == key)) for q in quarters]
        for key in keys
    }
    charts.write_svg(out_dir / f"{name}.svg", charts.line_chart(quarters, lines, title))


def cmd_analyze(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    produced = []

    if args.samples and args.verdicts:
        samples = _read_samples(args.samples)
        verdicts, diagnostics = read_verdicts(_require_file(args.verdicts))
        _print_diagnostics(diagnostics, args.verdicts)
        pairs = pair_verdicts(samples, verdicts)

        for dimension, title in (
            ("language", "AI file rate by language"),
            ("tech_stack", "AI file rate by tech stack"),
            ("file_function", "AI file rate by file function"),
            ("repo", "AI file rate by repository"),
        ):
            _adoption_outputs(out_dir, f"adoption_by_{dimension}", title, adoption_by(dimension, pairs))
        _series_outputs(
            out_dir, "quarterly_tech_stack", "Quarterly AI file rate by tech stack",
            quarterly_series("tech_stack", pairs),
        )
        _series_outputs(
            out_dir, "quarterly_contribution", "Quarterly AI contribution",
            quarterly_series("all", pairs),
        )
        repo_rows = adoption_by("repo", pairs)
        group_rows, diagnostics = topn_bottomn(repo_rows, n_values=tuple(args.top_n))
        _print_diagnostics(diagnostics, "topn_bottomn")
        _write_csv(
            out_dir / "topn_bottomn.csv",
            ["n", "group", "mean_rate", "mean_total_files", "mean_ai_files"],
            [
                [str(r.n), r.group, _fraction_str(r.mean_rate),
                 _fraction_str(r.mean_total_files), _fraction_str(r.mean_ai_files)]
                for r in group_rows
            ],
        )
        charts.write_svg(
            out_dir / "topn_bottomn.svg",
            charts.bar_chart(
                [f"N={r.n}/{r.group}" for r in group_rows],
                {"mean_rate": [float(r.mean_rate) for r in group_rows]},
                "Top-N vs Bottom-N mean AI file rate",
            ),
        )

        rules = load_rules(args.lcs_rules)
        values = [lexical_profile(s.content, s.language, rules).lcs for s in samples]
        histogram = lcs_histogram(values)
        _write_csv(
            out_dir / "lcs_histogram.csv",
            ["bucket", "files"],
            [[bucket, str(count)] for bucket, count in histogram.items()],
        )
        charts.write_svg(
            out_dir / "lcs_histogram.svg",
            charts.bar_chart(
                list(histogram), {"files": [float(v) for v in histogram.values()]},
                "Lexical complexity distribution",
            ),
        )
        produced.append("adoption")

    if args.changes:
        changes, diagnostics = read_records(_require_file(args.changes), CommitFileChange)
        _print_diagnostics(diagnostics, args.changes)
        activity: dict[str, dict[str, set | int]] = {}
        for change in changes:
            bucket = activity.setdefault(quarter_of(change.timestamp), {"commits": set(), "files": 0})
            bucket["commits"].add(change.commit)
            bucket["files"] += 1
        rows = [
            [quarter, str(len(bucket["commits"])), str(bucket["files"])]
            for quarter, bucket in sorted(activity.items())
        ]
        _write_csv(out_dir / "change_activity.csv", ["quarter", "commits", "changed_files"], rows)
        charts.write_svg(
            out_dir / "change_activity.svg",
            charts.line_chart(
                [r[0] for r in rows],
                {"changed_files": [float(r[2]) for r in rows]},
                "Changed files per quarter",
            ),
        )
        produced.append("changes")

    if args.vulns:
        vulns, diagnostics = read_records(_require_file(args.vulns), VulnRecord)
        _print_diagnostics(diagnostics, args.vulns)
        if not vulns:
            raise DataError(f"no valid vulnerability records in {args.vulns}")

        impact = net_impact(vulns)
        _write_csv(
            out_dir / "net_impact.csv",
            ["language", "intro_ai_share", "fix_ai_share", "net_impact", "records"],
            [
                [r.language, _fraction_str(r.intro_ai_share), _fraction_str(r.fix_ai_share),
                 _fraction_str(r.net_impact), str(r.records)]
                for r in impact
            ],
        )
        charts.write_svg(
            out_dir / "net_impact.svg",
            charts.bar_chart(
                [r.language for r in impact],
                {"net_impact": [float(r.net_impact) for r in impact]},
                "AI net impact by language",
            ),
        )

        mapping = load_cwe_categories(args.cwe_map)
        rows, shares, diagnostics = cwe_profile(vulns, mapping)
        _print_diagnostics(diagnostics, "cwe_profile")
        _write_csv(
            out_dir / "cwe_profile.csv",
            ["cwe_id", "ai_share", "risk_category", "records"],
            [[r.cwe_id, _fraction_str(r.ai_share), r.risk_category.value, str(r.records)] for r in rows],
        )
        charts.write_svg(
            out_dir / "cwe_profile.svg",
            charts.bar_chart(
                [r.cwe_id for r in rows],
                {"ai_share": [float(r.ai_share) for r in rows]},
                "AI introduction share by CWE",
            ),
        )
        _write_csv(
            out_dir / "cwe_category_shares.csv",
            ["risk_category", "share_of_ai_introduced"],
            [[category.value, _fraction_str(share)] for category, share in shares.items()],
        )
        charts.write_svg(
            out_dir / "cwe_category_shares.svg",
            charts.bar_chart(
                [c.value for c in shares],
                {"share": [float(s) for s in shares.values()]},
                "Risk categories of AI-introduced vulnerabilities",
            ),
        )

        test = severity_compare(vulns, alpha=args.alpha)
        _write_csv(
            out_dir / "severity_compare.csv",
            ["u_statistic", "p_value", "alpha", "reject_null", "method",
             "median_ai", "median_human", "mean_ai", "mean_human", "n_ai", "n_human"],
            [[str(test.u_statistic), str(test.p_value), str(test.alpha),
              str(test.reject_null).lower(), test.method,
              str(test.median_a), str(test.median_b), str(test.mean_a), str(test.mean_b),
              str(test.n_a), str(test.n_b)]],
        )
        charts.write_svg(
            out_dir / "severity_compare.svg",
            charts.bar_chart(
                ["median", "mean"],
                {"ai": [test.median_a, test.mean_a], "human": [test.median_b, test.mean_b]},
                "CVSS severity by introduction source",
            ),
        )

        vectors = attack_vector_distribution(vulns)
        vector_names = [v.value for v in next(iter(vectors.values()))] if vectors else []
        _write_csv(
            out_dir / "attack_vectors.csv",
            ["intro_source", "attack_vector", "share"],
            [
                [source.value, vector.value, _fraction_str(share)]
                for source, table in vectors.items()
                for vector, share in table.items()
            ],
        )
        charts.write_svg(
            out_dir / "attack_vectors.svg",
            charts.bar_chart(
                vector_names,
                {
                    source.value: [float(share) for share in table.values()]
                    for source, table in vectors.items()
                },
                "Attack vector shares by introduction source",
            ),
        )

        series = quarterly_vuln_series(vulns)
        _write_csv(
            out_dir / "quarterly_vulns.csv",
            ["quarter", "records", "intro_ai_rate", "fix_ai_rate",
             "mean_cvss_ai_intro", "mean_cvss_human_intro"],
            [
                [r.quarter, str(r.records), _fraction_str(r.intro_ai_rate), _fraction_str(r.fix_ai_rate),
                 "" if r.mean_cvss_ai_intro is None else str(r.mean_cvss_ai_intro),
                 "" if r.mean_cvss_human_intro is None else str(r.mean_cvss_human_intro)]
                for r in series
            ],
        )
        charts.write_svg(
            out_dir / "quarterly_vulns.svg",
            charts.line_chart(
                [r.quarter for r in series],
                {
                    "intro_ai_rate": [float(r.intro_ai_rate) for r in series],
                    "fix_ai_rate": [float(r.fix_ai_rate) for r in series],
                },
                "Quarterly AI introduction and fix rates",
            ),
        )
        produced.append("vulns")

    if not produced:
        raise DataError("nothing to analyze: pass --samples/--verdicts, --changes, or --vulns")
    log.info("analysis written to %s (%s)", out_dir, ", ".join(produced))
    return EXIT_OK


def cmd_report(args) -> int:
    analysis_dir = Path(args.analysis_dir)
    if not analysis_dir.is_dir():
        raise DataError(f"analysis directory not found: {analysis_dir}")
    lines = ["# codeprov run report", ""]
    if args.evaluation:
        lines.append("## Ensemble evaluation")
        lines.append("")
        with open(_require_file(args.evaluation), "r", encoding="utf-8", newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                cells = " | ".join(row)
                lines.append(f"| {cells} |")
                if i == 0:
                    lines.append("|" + " --- |" * len(row))
        lines.append("")
    for path in sorted(analysis_dir.glob("*.csv")):
        lines.append(f"## {path.stem}")
        lines.append("")
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        for i, row in enumerate(rows[: args.max_rows + 1]):
            lines.append("| " + " | ".join(row) + " |")
            if i == 0:
                lines.append("|" + " --- |" * len(row))
        if len(rows) > args.max_rows + 1:
            lines.append(f"| ... {len(rows) - 1} data rows total |")
        lines.append("")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
        log.info("wrote report to %s", args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------


def _add_global_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="seed override (flags beat config)")
    parser.add_argument("--workers", type=int, default=None, help="worker count override")
    parser.add_argument("--log-level", default=None, help="debug|info|warning|error")


def build_parser() -> _Parser:
    parser = _Parser(prog="codeprov", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("harvest", help="extract code pairs from local git clones")
    p.add_argument("--repo", action="append", default=[], help="path to a local clone (repeatable)")
    p.add_argument("--repo-list", help="file listing clone paths, one per line")
    p.add_argument("--window-start", required=True)
    p.add_argument("--window-end", required=True)
    p.add_argument("--allowlist", help="comma-separated extensions; default: code extensions")
    p.add_argument("--max-file-size", type=int, default=1 << 20)
    p.add_argument("--out", required=True)
    _add_global_flags(p)
    p.set_defaults(func=cmd_harvest)

    p = sub.add_parser("build-corpus", help="build labeled or unlabeled sample corpora")
    p.add_argument("--mode", choices=("human", "wild", "ai"), required=True)
    p.add_argument("--repo", action="append", default=[], help="local clone (human/wild modes)")
    p.add_argument("--repo-list", help="file listing clone paths, one per line")
    p.add_argument("--window-start")
    p.add_argument("--window-end")
    p.add_argument("--allowlist")
    p.add_argument("--max-file-size", type=int, default=1 << 20)
    p.add_argument("--per-commit", action="store_true", help="one sample per change (wild mode)")
    p.add_argument("--changes-out", help="also write the raw change stream (wild mode)")
    p.add_argument("--matrix", help="task matrix config (ai mode); default: packaged preset")
    p.add_argument("--import", dest="import_file", help="generator responses JSONL (ai mode)")
    p.add_argument("--generator-cmd", help="generator adapter command line (ai mode)")
    p.add_argument("--no-dedup", action="store_true")
    p.add_argument("--out", required=True)
    _add_global_flags(p)
    p.set_defaults(func=cmd_build_corpus)

    p = sub.add_parser("import-vulns", help="validate and import vulnerability records")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--label-with", help="ensemble config for labeling unlabeled fragments")
    p.add_argument("--scores", action="append", help="external score files for --label-with")
    _add_global_flags(p)
    p.set_defaults(func=cmd_import_vulns)

    p = sub.add_parser("detect", help="classify samples with the cascade ensemble")
    p.add_argument("--config", help=f"ensemble config JSON (default: ${ENV_CONFIG})")
    p.add_argument("--scores", action="append", help="external score JSONL (repeatable)")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("full", "no-stage1", "no-stage2"), default=None)
    p.add_argument("--tau1", help="stage-1 exit threshold override")
    p.add_argument("--tau2", help="stage-2 decision threshold override")
    _add_global_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score the ensemble against a labeled corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config", help=f"ensemble config JSON (default: ${ENV_CONFIG})")
    p.add_argument("--scores", action="append")
    p.add_argument("--ablations", action="store_true", help="evaluate full plus both ablations")
    p.add_argument("--mode", choices=("full", "no-stage1", "no-stage2"), default=None)
    p.add_argument("--tau1", help="stage-1 exit threshold override")
    p.add_argument("--tau2", help="stage-2 decision threshold override")
    p.add_argument("--out", required=True)
    _add_global_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("analyze", help="run the adoption/security analytics suite")
    p.add_argument("--samples", help="samples JSONL matching the verdicts")
    p.add_argument("--verdicts", help="verdicts JSONL from detect")
    p.add_argument("--changes", help="changes JSONL from harvest")
    p.add_argument("--vulns", help="vulnerability records JSONL")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--cwe-map", help="CWE risk-category table; default: packaged mapping")
    p.add_argument("--lcs-rules", help="lexical counting rules; default: packaged table")
    p.add_argument("--top-n", type=int, nargs="+", default=[10, 100, 500])
    p.add_argument("--alpha", type=float, default=0.05)
    _add_global_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="render a markdown summary of analysis outputs")
    p.add_argument("--analysis-dir", required=True)
    p.add_argument("--evaluation", help="evaluation CSV from evaluate")
    p.add_argument("--max-rows", type=int, default=12)
    p.add_argument("--out", help="output path; default: stdout")
    _add_global_flags(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    if argv and argv[0] == "--version":
        print(json.dumps({"tool": "codeprov", "version": TOOL_VERSION, "schema": SCHEMA_VERSION}))
        return EXIT_OK

    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(logging.WARNING)

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE

    if getattr(args, "log_level", None):
        logging.getLogger().setLevel(args.log_level.upper())

    try:
        return args.func(args)
    except CodeProvError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except Exception:  # pragma: no cover - defensive
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
