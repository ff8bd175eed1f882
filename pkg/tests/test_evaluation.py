"""Ablation evaluation and the tau2 sweep."""

from __future__ import annotations

import random
from decimal import Decimal

import pytest
from helpers import make_sample

from codeprov import (
    CascadeEnsemble,
    ConstantDetector,
    DataError,
    EnsembleConfig,
    EnsembleMode,
    ExternalScoreDetector,
    ProvenanceLabel,
    confusion,
    evaluate_ensemble,
    metrics,
    threshold_sweep,
)
from codeprov.metrics import truth_labels


def labeled(n_ai=6, n_human=6):
    return [make_sample(f"a{i}", label=ProvenanceLabel.AI) for i in range(n_ai)] + [
        make_sample(f"h{i}", label=ProvenanceLabel.HUMAN) for i in range(n_human)
    ]


def constant_master_ensemble(value: float) -> CascadeEnsemble:
    detectors = [ConstantDetector(value, detector_id="m"), ConstantDetector(0.4, detector_id="a")]
    return CascadeEnsemble(detectors, EnsembleConfig(master_id="m", aux_ids=("a",)))


def test_modes_collapse_when_master_always_exits():
    reports = evaluate_ensemble(constant_master_ensemble(0.95), labeled())
    assert reports[EnsembleMode.NO_STAGE2] == reports[EnsembleMode.FULL]
    assert reports[EnsembleMode.FULL].recall == 1


def test_no_stage2_recall_zero_when_master_never_exits():
    reports = evaluate_ensemble(constant_master_ensemble(0.0), labeled())
    assert reports[EnsembleMode.NO_STAGE2].recall == 0


def test_evaluate_full_equals_direct_pipeline():
    rng = random.Random(4)
    corpus = labeled(10, 10)
    tables = {
        "m": {s.id: rng.random() for s in corpus},
        "x": {s.id: rng.random() for s in corpus},
    }
    ensemble = CascadeEnsemble(
        [ExternalScoreDetector(tables["m"], "m"), ExternalScoreDetector(tables["x"], "x")],
        EnsembleConfig(master_id="m", aux_ids=("x",)),
    )
    reports = evaluate_ensemble(ensemble, corpus, modes=(EnsembleMode.FULL,))
    direct = metrics(
        confusion(ensemble.classify_batch(corpus).verdict_labels(), truth_labels(corpus))
    )
    assert reports[EnsembleMode.FULL] == direct


def test_evaluate_requires_two_class_corpus():
    with pytest.raises(DataError):
        evaluate_ensemble(constant_master_ensemble(0.5), [make_sample("a", label=ProvenanceLabel.AI)] * 2)


def test_threshold_sweep_boundaries_and_grid_validation():
    corpus = labeled(5, 5)
    ensemble = constant_master_ensemble(0.4)
    curve = threshold_sweep(ensemble, corpus, ["0", "0.5", "1"])
    assert [tau for tau, _ in curve] == [Decimal(0), Decimal("0.5"), Decimal(1)]
    # tau2 = 0: every stage-2 sample is labeled AI, so recall is maximal
    assert curve[0][1].recall == 1
    with pytest.raises(DataError):
        threshold_sweep(ensemble, corpus, [])
    with pytest.raises(DataError):
        threshold_sweep(ensemble, corpus, ["1.5"])


def test_threshold_sweep_ai_count_non_increasing_over_random_corpora():
    rng = random.Random(9)
    grid = ["0", "0.2", "0.4", "0.53", "0.7", "0.9", "1"]
    for _ in range(50):
        corpus = labeled(8, 8)
        tables = {
            "m": {s.id: rng.random() for s in corpus},
            "x": {s.id: rng.random() for s in corpus},
        }
        ensemble = CascadeEnsemble(
            [ExternalScoreDetector(tables["m"], "m"), ExternalScoreDetector(tables["x"], "x")],
            EnsembleConfig(master_id="m", aux_ids=("x",)),
        )
        curve = threshold_sweep(ensemble, corpus, grid)
        ai_counts = [report.counts.tp + report.counts.fp for _, report in curve]
        assert ai_counts == sorted(ai_counts, reverse=True)
        # stage-1 exits are tau2-invariant: every sweep point labels them AI
        exits = sum(
            1
            for v in ensemble.classify_batch(corpus).verdicts
            if v.decision_path.value == "stage1_exit"
        )
        assert min(ai_counts) >= exits
