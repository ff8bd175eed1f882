"""Ensemble evaluation: full-vs-ablation comparisons and tau2 sweeps."""

from __future__ import annotations

from decimal import Decimal
from typing import Iterable, Sequence

from .cascade import CascadeEnsemble, DecisionPath, EnsembleMode
from .metrics import MetricsReport, confusion, metrics, require_two_class, truth_labels
from .records import CodeSample, DataError, ProvenanceLabel
from .validation import check_non_empty, check_unit_interval, to_decimal

ALL_MODES = (EnsembleMode.FULL, EnsembleMode.NO_STAGE1, EnsembleMode.NO_STAGE2)


def evaluate_ensemble(
    ensemble: CascadeEnsemble,
    corpus: Sequence[CodeSample],
    modes: Iterable[EnsembleMode] = ALL_MODES,
    workers: int = 1,
) -> dict[EnsembleMode, MetricsReport]:
    """Metrics of the ensemble per mode over a labeled two-class corpus."""
    samples = check_non_empty("corpus", corpus)
    require_two_class(samples)
    truth = truth_labels(samples)
    reports: dict[EnsembleMode, MetricsReport] = {}
    for mode in modes:
        result = ensemble.with_mode(EnsembleMode(mode)).classify_batch(samples, workers=workers)
        if result.failures:
            first = result.failures[0]
            raise DataError(f"classification failed for {first.sample_id!r}: {first.error}")
        reports[EnsembleMode(mode)] = metrics(confusion(result.verdict_labels(), truth))
    return reports


def threshold_sweep(
    ensemble: CascadeEnsemble,
    corpus: Sequence[CodeSample],
    tau2_grid: Sequence[Decimal | float | str],
) -> list[tuple[Decimal, MetricsReport]]:
    """Full-mode metrics for each tau2 on the grid.

    Stage-1 exits are decided by tau1 and are therefore identical across the
    sweep; each sample is scored once and only the tau2 comparison reruns.
    """
    grid = [to_decimal(value) for value in check_non_empty("tau2_grid", tau2_grid)]
    for value in grid:
        check_unit_interval("tau2 grid value", value)
    samples = check_non_empty("corpus", corpus)
    require_two_class(samples)
    truth = truth_labels(samples)

    full = ensemble.with_mode(EnsembleMode.FULL)
    result = full.classify_batch(samples)
    if result.failures:
        first = result.failures[0]
        raise DataError(f"classification failed for {first.sample_id!r}: {first.error}")

    curve: list[tuple[Decimal, MetricsReport]] = []
    for tau2 in grid:
        predicted: dict[str, ProvenanceLabel] = {}
        for verdict in result.verdicts:
            if verdict.decision_path is DecisionPath.STAGE1_EXIT:
                predicted[verdict.sample_id] = ProvenanceLabel.AI
            else:
                predicted[verdict.sample_id] = (
                    ProvenanceLabel.AI if verdict.final_score >= tau2 else ProvenanceLabel.HUMAN
                )
        curve.append((tau2, metrics(confusion(predicted, truth))))
    return curve
