"""Two-stage cascade ensemble over base detectors.

Stage 1 asks the high-precision master detector for a fast screen: a score
strictly above tau1 labels the sample AI-generated immediately, without
invoking any auxiliary detector. Everything else proceeds to stage 2, a
weighted aggregation over the master (weight 2 by default) and the
auxiliaries (weight 1 each):

    final = sum(score_i * weight_i) / sum(weight_i)

A final score at or above tau2 labels the sample AI-generated, below it
human-written. Score arithmetic runs in Decimal at 28 significant digits so
boundary decisions are platform-stable.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from decimal import Context, Decimal, localcontext
from enum import Enum
from typing import Iterable, Mapping, Sequence

from sklearn.base import BaseEstimator

from .detectors import Detector, DetectorError
from .records import (
    CodeProvError,
    CodeSample,
    DataError,
    Diagnostic,
    ProvenanceLabel,
    _open_sink,
    _open_source,
)
from .validation import check_positive, check_unit_interval, to_decimal

SCORE_PRECISION = 28  # significant digits for aggregation arithmetic

DEFAULT_TAU1 = Decimal("0.9")
DEFAULT_TAU2 = Decimal("0.53")
MASTER_WEIGHT = Decimal(2)
AUX_WEIGHT = Decimal(1)


class EnsembleMode(str, Enum):
    FULL = "full"
    NO_STAGE1 = "no_stage1"
    NO_STAGE2 = "no_stage2"


class DecisionPath(str, Enum):
    STAGE1_EXIT = "stage1_exit"
    STAGE2_AGGREGATE = "stage2_aggregate"


@dataclass(frozen=True)
class EnsembleConfig:
    """Which detector referees, their weights, and the two thresholds."""

    master_id: str
    aux_ids: tuple[str, ...]
    tau1: Decimal = DEFAULT_TAU1
    tau2: Decimal = DEFAULT_TAU2
    mode: EnsembleMode = EnsembleMode.FULL
    weights: Mapping[str, Decimal] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "aux_ids", tuple(self.aux_ids))
        object.__setattr__(self, "tau1", to_decimal(self.tau1))
        object.__setattr__(self, "tau2", to_decimal(self.tau2))
        object.__setattr__(self, "mode", EnsembleMode(self.mode))
        check_unit_interval("tau1", self.tau1, low_open=True)
        check_unit_interval("tau2", self.tau2)
        if not self.master_id:
            raise DataError("master_id must be non-empty")
        if self.master_id in self.aux_ids:
            raise DataError("master_id must not appear among aux_ids")
        if len(set(self.aux_ids)) != len(self.aux_ids):
            raise DataError("aux_ids must be distinct")
        resolved = {self.master_id: MASTER_WEIGHT}
        resolved.update({aux: AUX_WEIGHT for aux in self.aux_ids})
        for key, value in dict(self.weights).items():
            if key not in resolved:
                raise DataError(f"weight given for unknown detector {key!r}")
            resolved[key] = to_decimal(value)
        for key, value in resolved.items():
            check_positive(f"weight for {key}", value)
        object.__setattr__(self, "weights", resolved)

    @property
    def referee_ids(self) -> tuple[str, ...]:
        return (self.master_id, *self.aux_ids)


@dataclass(frozen=True)
class Verdict:
    """The ensemble decision for one sample.

    On a stage-1 exit, final_score is the master's score and no auxiliary
    appears in component_scores. In no_stage2 mode, non-exiting samples are
    labeled human by the mode contract (the tau2 rule does not apply); their
    final_score is the master's score.
    """

    sample_id: str
    label: ProvenanceLabel
    final_score: Decimal
    decision_path: DecisionPath
    component_scores: Mapping[str, float]


@dataclass(frozen=True)
class BatchFailure:
    sample_id: str
    error: str


@dataclass(frozen=True)
class BatchResult:
    verdicts: list[Verdict]
    failures: list[BatchFailure]

    def verdict_labels(self) -> dict[str, ProvenanceLabel]:
        return {v.sample_id: v.label for v in self.verdicts}


def aggregate_scores(
    component_scores: Mapping[str, float | Decimal], weights: Mapping[str, Decimal]
) -> Decimal:
    """Weighted mean of referee scores in fixed-precision Decimal."""
    with localcontext(Context(prec=SCORE_PRECISION)):
        numerator = Decimal(0)
        denominator = Decimal(0)
        for detector_id, score in component_scores.items():
            weight = weights[detector_id]
            numerator += to_decimal(score) * weight
            denominator += weight
        return numerator / denominator


class CascadeEnsemble(BaseEstimator):
    """Cascade classifier over a set of base detectors.

    ``detectors`` may be a sequence (ids taken from each detector) or a
    mapping of id to detector; ``config`` names the master and auxiliaries.
    """

    def __init__(self, detectors: Sequence[Detector] | Mapping[str, Detector], config: EnsembleConfig):
        self.detectors = detectors
        self.config = config

    def _registry(self) -> dict[str, Detector]:
        if isinstance(self.detectors, Mapping):
            registry = dict(self.detectors)
        else:
            registry = {d.detector_id: d for d in self.detectors}
        missing = [rid for rid in self.config.referee_ids if rid not in registry]
        if missing:
            raise DetectorError(f"configured detectors not provided: {', '.join(missing)}")
        return registry

    def _score_of(self, registry: dict[str, Detector], detector_id: str, sample: CodeSample) -> float:
        try:
            return registry[detector_id].score(sample).score
        except CodeProvError as exc:
            raise DetectorError(f"detector {detector_id!r} failed on {sample.id!r}: {exc}") from exc

    def classify(self, sample: CodeSample) -> Verdict:
        config = self.config
        registry = self._registry()
        components: dict[str, float] = {}

        if config.mode is not EnsembleMode.NO_STAGE1:
            master_score = self._score_of(registry, config.master_id, sample)
            components[config.master_id] = master_score
            if to_decimal(master_score) > config.tau1:
                return Verdict(
                    sample_id=sample.id,
                    label=ProvenanceLabel.AI,
                    final_score=to_decimal(master_score),
                    decision_path=DecisionPath.STAGE1_EXIT,
                    component_scores=components,
                )
            if config.mode is EnsembleMode.NO_STAGE2:
                return Verdict(
                    sample_id=sample.id,
                    label=ProvenanceLabel.HUMAN,
                    final_score=to_decimal(master_score),
                    decision_path=DecisionPath.STAGE2_AGGREGATE,
                    component_scores=components,
                )
        else:
            components[config.master_id] = self._score_of(registry, config.master_id, sample)

        for aux_id in config.aux_ids:
            components[aux_id] = self._score_of(registry, aux_id, sample)
        final = aggregate_scores(components, config.weights)
        label = ProvenanceLabel.AI if final >= config.tau2 else ProvenanceLabel.HUMAN
        return Verdict(
            sample_id=sample.id,
            label=label,
            final_score=final,
            decision_path=DecisionPath.STAGE2_AGGREGATE,
            component_scores=components,
        )

    def classify_batch(self, samples: Iterable[CodeSample], workers: int = 1) -> BatchResult:
        """Element-wise classification; per-sample failures never abort the batch."""

        def attempt(sample: CodeSample) -> tuple[Verdict | None, BatchFailure | None]:
            try:
                return self.classify(sample), None
            except CodeProvError as exc:
                return None, BatchFailure(sample.id, str(exc))

        items = list(samples)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(attempt, items))
        else:
            outcomes = [attempt(s) for s in items]
        verdicts = [v for v, _ in outcomes if v is not None]
        failures = [f for _, f in outcomes if f is not None]
        return BatchResult(verdicts=verdicts, failures=failures)

    def predict(self, samples: Iterable[CodeSample]) -> list[ProvenanceLabel]:
        """Labels in input order; raises if any sample fails to classify."""
        result = self.classify_batch(samples)
        if result.failures:
            first = result.failures[0]
            raise DetectorError(f"{len(result.failures)} samples failed; first: {first.sample_id}: {first.error}")
        return [v.label for v in result.verdicts]

    def with_mode(self, mode: EnsembleMode) -> "CascadeEnsemble":
        return CascadeEnsemble(self.detectors, replace(self.config, mode=mode))


# ---------------------------------------------------------------------------
# Verdict serialization (verdicts.jsonl)
# ---------------------------------------------------------------------------


def verdict_to_obj(verdict: Verdict) -> dict:
    """Canonical JSON object; final_score is kept as an exact decimal string."""
    return {
        "schema": 1,
        "kind": "verdict",
        "sample_id": verdict.sample_id,
        "label": verdict.label.value,
        "final_score": str(verdict.final_score),
        "decision_path": verdict.decision_path.value,
        "component_scores": dict(verdict.component_scores),
    }


def verdict_from_obj(obj: dict) -> Verdict:
    return Verdict(
        sample_id=str(obj["sample_id"]),
        label=ProvenanceLabel(obj["label"]),
        final_score=Decimal(str(obj["final_score"])),
        decision_path=DecisionPath(obj["decision_path"]),
        component_scores={str(k): float(v) for k, v in obj.get("component_scores", {}).items()},
    )


def write_verdicts(verdicts: Iterable[Verdict], sink) -> int:
    stream, owned = _open_sink(sink)
    count = 0
    try:
        for verdict in verdicts:
            line = json.dumps(verdict_to_obj(verdict), ensure_ascii=False, separators=(",", ":"))
            stream.write(line.encode("utf-8") + b"\n")
            count += 1
    finally:
        if owned:
            stream.close()
    return count


def read_verdicts(source) -> tuple[list[Verdict], list[Diagnostic]]:
    stream, owned = _open_source(source)
    verdicts: list[Verdict] = []
    diagnostics: list[Diagnostic] = []
    try:
        for line_no, raw in enumerate(stream, start=1):
            text = raw.decode("utf-8", errors="replace").strip()
            if not text:
                continue
            try:
                verdicts.append(verdict_from_obj(json.loads(text)))
            except (KeyError, TypeError, ValueError, ArithmeticError) as exc:
                diagnostics.append(Diagnostic(f"malformed verdict line: {exc}", line=line_no))
    finally:
        if owned:
            stream.close()
    return verdicts, diagnostics
