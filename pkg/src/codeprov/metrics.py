"""Confusion counting, classification metrics, and the labeled-corpus split.

The positive class is always "AI-generated". Metrics are exact Fractions so
identities like f1 = 2PR/(P+R) hold without rounding; a metric whose
denominator is empty is reported as None (undefined), never silently 0.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .records import CodeSample, DataError, ProvenanceLabel
from .validation import check_unit_interval


class SingleClassCorpusError(DataError):
    """Raised when an evaluation corpus does not contain both labels."""


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise DataError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: Fraction
    precision: Fraction | None
    recall: Fraction | None
    f1: Fraction | None
    counts: ConfusionCounts


def metrics(counts: ConfusionCounts) -> MetricsReport:
    """Derive accuracy/precision/recall/f1 from confusion counts, exactly."""
    total = counts.total
    if total == 0:
        raise DataError("cannot compute metrics over zero samples")
    accuracy = Fraction(counts.tp + counts.tn, total)
    precision = Fraction(counts.tp, counts.tp + counts.fp) if counts.tp + counts.fp else None
    recall = Fraction(counts.tp, counts.tp + counts.fn) if counts.tp + counts.fn else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricsReport(accuracy=accuracy, precision=precision, recall=recall, f1=f1, counts=counts)


def confusion(
    predicted: Mapping[str, ProvenanceLabel], truth: Mapping[str, ProvenanceLabel]
) -> ConfusionCounts:
    """Count TP/FP/FN/TN over prediction and truth maps keyed by sample id."""
    if set(predicted) != set(truth):
        missing = set(truth) - set(predicted)
        extra = set(predicted) - set(truth)
        raise DataError(
            f"prediction/truth id mismatch: {len(missing)} missing, {len(extra)} extra"
        )
    tp = fp = fn = tn = 0
    for sample_id, actual in truth.items():
        if actual not in (ProvenanceLabel.AI, ProvenanceLabel.HUMAN):
            raise DataError(f"truth label for {sample_id!r} must be ai or human")
        guessed = predicted[sample_id]
        if guessed is ProvenanceLabel.AI:
            if actual is ProvenanceLabel.AI:
                tp += 1
            else:
                fp += 1
        else:
            if actual is ProvenanceLabel.AI:
                fn += 1
            else:
                tn += 1
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def truth_labels(samples: Sequence[CodeSample]) -> dict[str, ProvenanceLabel]:
    return {s.id: s.label for s in samples}


def require_two_class(samples: Sequence[CodeSample]) -> None:
    labels = {s.label for s in samples}
    if not {ProvenanceLabel.AI, ProvenanceLabel.HUMAN} <= labels:
        raise SingleClassCorpusError("corpus must contain both ai and human samples")


def split(
    corpus: Sequence[CodeSample], fraction: float, seed: int
) -> tuple[list[CodeSample], list[CodeSample]]:
    """Seeded, label-stratified split into (part_a, part_b).

    Part_a receives round(fraction * n) samples; per-label counts stay within
    one sample of the label's exact proportion (largest-remainder rounding,
    ties broken by label value). Parts are disjoint and exhaustive.
    """
    samples = list(corpus)
    if len(samples) < 2:
        raise DataError("corpus must contain at least 2 samples to split")
    check_unit_interval("fraction", fraction, low_open=True)
    if fraction >= 1:
        raise DataError("fraction must be below 1")

    shuffled = samples[:]
    random.Random(seed).shuffle(shuffled)

    by_label: dict[ProvenanceLabel, list[CodeSample]] = {}
    for sample in shuffled:
        by_label.setdefault(sample.label, []).append(sample)

    target_total = round(fraction * len(samples))
    quota = {label: math.floor(fraction * len(group)) for label, group in by_label.items()}
    leftover = target_total - sum(quota.values())
    remainders = sorted(
        by_label,
        key=lambda label: (-(fraction * len(by_label[label]) - quota[label]), label.value),
    )
    for label in remainders[:leftover]:
        quota[label] += 1

    chosen: set[str] = set()
    for label, group in by_label.items():
        chosen.update(sample.id for sample in group[: quota[label]])

    part_a = [s for s in shuffled if s.id in chosen]
    part_b = [s for s in shuffled if s.id not in chosen]
    return part_a, part_b
